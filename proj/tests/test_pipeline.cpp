#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "doctest.h"
#include "pprfraud/config.hpp"
#include "pprfraud/graph.hpp"
#include "pprfraud/pipeline.hpp"

using namespace pprfraud;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("pprfraud_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

PipelineConfig small_config(const fs::path& out) {
    PipelineConfig c;
    c.output_dir = out;
    c.synth.n_accounts = 800;
    c.synth.n_transactions = 20000;
    c.synth.n_rings = 5;
    c.synth.fraud_rate = 0.01;
    c.train.max_epochs = 100;
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t data_rows(const fs::path& p) {
    const std::string text = slurp(p);
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) - 1;
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(PPRFRAUD_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string small_cli_flags(const fs::path& out) {
    return "--output_dir " + out.string() +
           " --n_accounts 800 --n_transactions 20000 --n_rings 5 --fraud_rate 0.01 --max_epochs 100";
}

}  // namespace

TEST_CASE("end-to-end run writes every artifact") {
    auto dir = scratch("e2e");
    std::ostringstream log;
    run_pipeline(small_config(dir), log);
    for (const char* name :
         {artifact::ledger, artifact::rings, artifact::edges, artifact::graph_stats, artifact::ppr_scores,
          artifact::features_train, artifact::features_test, artifact::model, artifact::metrics, artifact::roc,
          artifact::pr, artifact::psi, artifact::importance, artifact::roc_svg, artifact::pr_svg,
          artifact::importance_svg, artifact::report, artifact::manifest})
        CHECK_MESSAGE(fs::exists(dir / name), name);

    auto metrics = nlohmann::json::parse(slurp(dir / artifact::metrics));
    REQUIRE(metrics.contains("comparison"));
    const auto& cmp = metrics["comparison"];
    CHECK(cmp.contains("auc_base"));
    CHECK(cmp.contains("auc_ppr"));
    CHECK(cmp["delta_auc"].get<double>() ==
          doctest::Approx(cmp["auc_ppr"].get<double>() - cmp["auc_base"].get<double>()));
    CHECK(metrics["models"][kBaseModelName]["features"].get<std::size_t>() == 6);
    CHECK(metrics["models"][kPprModelName]["features"].get<std::size_t>() == 7);

    CHECK(data_rows(dir / artifact::psi) == 7);
    CHECK(data_rows(dir / artifact::importance) == 7);

    // Manifest hashes match the files on disk.
    auto manifest = nlohmann::json::parse(slurp(dir / artifact::manifest));
    std::set<std::string> listed;
    for (const auto& f : manifest["files"]) {
        listed.insert(f["name"].get<std::string>());
        CHECK(f["sha256"].get<std::string>() == sha256_file(dir / f["name"].get<std::string>()));
    }
    CHECK(listed.count(artifact::metrics) == 1);
    CHECK(listed.count(artifact::manifest) == 0);
}

TEST_CASE("graph-stats agrees with the ingested ledger") {
    auto dir = scratch("graph");
    auto config = small_config(dir);
    std::ostringstream log;
    run_stage("synth", config, log);
    run_stage("graph-stats", config, log);

    auto split = load_split(config);
    std::set<AccountHash> nodes;
    std::set<std::pair<AccountHash, AccountHash>> edges;
    for (const auto* part : {&split.history, &split.train})
        for (const auto& t : *part) {
            nodes.insert(t.debtor_account);
            nodes.insert(t.creditor_account);
            edges.insert({t.debtor_account, t.creditor_account});
        }
    auto stats = nlohmann::json::parse(slurp(dir / artifact::graph_stats));
    CHECK(stats["n_nodes"].get<std::size_t>() == nodes.size());
    CHECK(stats["n_edges"].get<std::size_t>() == edges.size());
    CHECK(data_rows(dir / artifact::edges) == edges.size());
}

TEST_CASE("baseline mode reports six importances") {
    auto dir = scratch("baseline");
    auto config = small_config(dir);
    config.mode = RunMode::baseline;
    std::ostringstream log;
    run_pipeline(config, log);
    CHECK(data_rows(dir / artifact::importance) == 6);
    auto metrics = nlohmann::json::parse(slurp(dir / artifact::metrics));
    CHECK_FALSE(metrics.contains("comparison"));
    CHECK(metrics["models"].size() == 1);
}

TEST_CASE("stage-by-stage CLI run equals an end-to-end run") {
    auto staged = scratch("staged");
    auto whole = scratch("whole");
    for (const char* stage : {"synth", "graph-stats", "ppr", "features", "train", "evaluate", "psi", "report"})
        REQUIRE(run_cli(std::string(stage) + " " + small_cli_flags(staged), staged / "log.txt") == 0);
    REQUIRE(run_cli("run " + small_cli_flags(whole), whole / "log.txt") == 0);
    fs::remove(staged / "log.txt");
    fs::remove(whole / "log.txt");
    CHECK(slurp(staged / artifact::metrics) == slurp(whole / artifact::metrics));
    CHECK(slurp(staged / artifact::manifest) == slurp(whole / artifact::manifest));
}

TEST_CASE("CLI exit codes") {
    auto dir = scratch("cli");
    const fs::path log = dir / "log.txt";

    CHECK(run_cli("run --input " + (dir / "nope.csv").string() + " --output_dir " + (dir / "o").string(), log) ==
          2);
    CHECK(slurp(log).find("[ingest]") != std::string::npos);

    CHECK(run_cli("run --alpha 1.5 --output_dir " + (dir / "o").string(), log) == 1);
    CHECK(run_cli("run --mode sideways", log) == 1);
    CHECK(run_cli("frobnicate", log) == 1);

    {
        std::ofstream bad(dir / "bad.ini");
        bad << "[ppr]\nnot_a_key = 3\n";
    }
    CHECK(run_cli("run --config " + (dir / "bad.ini").string(), log) == 1);

    // A stage whose inputs were never produced names the producer.
    CHECK(run_cli("ppr --output_dir " + (dir / "empty").string(), log) == 2);
    CHECK(slurp(log).find("edges.csv") != std::string::npos);
    CHECK(slurp(log).find("graph-stats") != std::string::npos);

    CHECK(run_cli("default-config", log) == 0);
    CHECK(slurp(log).find("[ppr]") != std::string::npos);
}

TEST_CASE("missing intermediate message") {
    auto dir = scratch("missing");
    auto config = small_config(dir);
    std::ostringstream log;
    try {
        run_stage("train", config, log);
        FAIL("expected MissingIntermediate");
    } catch (const MissingIntermediate& e) {
        CHECK(e.stage() == "train");
        CHECK(std::string(e.what()).find("features") != std::string::npos);
    }
    CHECK_THROWS_AS(run_stage("teleport", config, log), ConfigError);
}

TEST_CASE("config parsing") {
    std::istringstream in("# comment\n[ppr]\nalpha = 0.9  # trailing\n; also a comment\n[pipeline]\nseed = 7\n");
    auto file = ConfigFile::parse(in);
    auto c = make_config(file);
    CHECK(c.ppr.alpha == 0.9);
    CHECK(c.seed == 7);
    CHECK(c.synth.seed == 7);

    std::istringstream wrong_section("[ppr]\nseed = 7\n");
    CHECK_THROWS_AS(ConfigFile::parse(wrong_section), ConfigError);
    std::istringstream no_equals("[ppr]\nalpha\n");
    CHECK_THROWS_AS(ConfigFile::parse(no_equals), ConfigError);

    ConfigFile f;
    f.set("history_days", "x");
    CHECK_THROWS_AS(make_config(f), ConfigError);

    // The rendered defaults parse back to the same rendering.
    std::istringstream rendered(render_config({}));
    CHECK(render_config(make_config(ConfigFile::parse(rendered))) == render_config({}));
}

TEST_CASE("shipped config matches the defaults") {
    auto file = ConfigFile::load(fs::path(PPRFRAUD_SOURCE_DIR) / "configs" / "synthetic.ini");
    CHECK(render_config(make_config(file)) == render_config({}));
}
