#include "pprfraud/pipeline.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <openssl/evp.h>

#include <json.hpp>

#include "pprfraud/csv.hpp"
#include "pprfraud/evaluation.hpp"
#include "pprfraud/exposure.hpp"
#include "pprfraud/features.hpp"
#include "pprfraud/graph.hpp"
#include "pprfraud/model.hpp"
#include "pprfraud/report.hpp"
#include "pprfraud/synth.hpp"

namespace pprfraud {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

fs::path out_path(const PipelineConfig& c, const char* name) { return c.output_dir / name; }

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::ifstream open_input(const std::string& stage, const fs::path& path, const std::string& producer) {
    if (!fs::exists(path)) throw MissingIntermediate(stage, path, producer);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StageError(stage, "cannot open '" + path.string() + "'");
    return in;
}

std::string read_file(const std::string& stage, const fs::path& path, const std::string& producer) {
    auto in = open_input(stage, path, producer);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<FeatureRow> load_features(const std::string& stage, const PipelineConfig& c, const char* name) {
    auto in = open_input(stage, out_path(c, name), "features");
    return read_features(in);
}

// (model name, include_ppr) for each model the mode asks for.
std::vector<std::pair<std::string, bool>> models_for(RunMode mode) {
    switch (mode) {
        case RunMode::baseline:
            return {{kBaseModelName, false}};
        case RunMode::with_ppr:
            return {{kPprModelName, true}};
        case RunMode::both:
            return {{kBaseModelName, false}, {kPprModelName, true}};
    }
    return {};
}

std::vector<std::pair<std::string, LogisticModel>> load_models(const std::string& stage, const PipelineConfig& c) {
    const auto doc = ordered_json::parse(read_file(stage, out_path(c, artifact::model), "train"));
    std::vector<std::pair<std::string, LogisticModel>> models;
    for (const auto& entry : doc.at("models"))
        models.emplace_back(entry.at("name").get<std::string>(), model_from_json(entry.at("model").dump()));
    return models;
}

std::string threshold_text(double t) { return std::isinf(t) ? "inf" : csv::format_double(t); }

ordered_json points_json(const std::vector<CurvePoint>& points) {
    auto arr = ordered_json::array();
    for (const auto& p : points) arr.push_back({p.x, p.y});
    return arr;
}

void stage_synth(const PipelineConfig& c, std::ostream& log) {
    const SynthLedger ledger = synthesize(c.synth);
    std::ostringstream ledger_csv, rings_csv;
    write_ledger(ledger_csv, ledger.transactions);
    write_rings(rings_csv, ledger.rings);
    write_file(out_path(c, artifact::ledger), ledger_csv.str());
    write_file(out_path(c, artifact::rings), rings_csv.str());
    const auto fraud = std::count_if(ledger.transactions.begin(), ledger.transactions.end(),
                                     [](const Transaction& t) { return t.label == 1; });
    log << "[synth] " << ledger.transactions.size() << " transactions, " << fraud << " fraudulent, "
        << ledger.rings.size() << " mule accounts\n";
}

void stage_graph(const PipelineConfig& c, std::ostream& log) {
    const SplitDataset split = load_split(c);
    std::vector<Transaction> known = split.history;
    known.insert(known.end(), split.train.begin(), split.train.end());
    const TransactionGraph graph = build_graph(known);

    std::ostringstream edges;
    write_edges(edges, graph);
    write_file(out_path(c, artifact::edges), edges.str());

    std::size_t dangling = 0, self_loops = 0;
    for (NodeId u = 0; u < graph.n_nodes(); ++u) {
        if (graph.out_degree(u) == 0) ++dangling;
        for (std::size_t e = graph.out_offsets()[u]; e < graph.out_offsets()[u + 1]; ++e)
            if (graph.out_targets()[e] == u) ++self_loops;
    }
    ordered_json stats;
    stats["n_nodes"] = graph.n_nodes();
    stats["n_edges"] = graph.n_edges();
    stats["n_transactions"] = known.size();
    stats["n_dangling"] = dangling;
    stats["n_self_loops"] = self_loops;
    stats["n_history"] = split.history.size();
    stats["n_train"] = split.train.size();
    stats["n_test"] = split.test.size();
    write_file(out_path(c, artifact::graph_stats), stats.dump(2) + "\n");
    log << "[graph-stats] nodes=" << graph.n_nodes() << " edges=" << graph.n_edges()
        << " transactions=" << known.size() << " dangling=" << dangling << "\n";
}

void stage_ppr(const PipelineConfig& c, std::ostream& log) {
    auto in = open_input("ppr", out_path(c, artifact::edges), "graph-stats");
    const auto edges = read_edges(in);
    const TransactionGraph graph = TransactionGraph::from_edges(edges);
    const SplitDataset split = load_split(c);
    const PersonalizationVector p = build_personalization(split.train, graph);
    const PprScores scores = compute_ppr(graph, p, c.ppr);
    require_converged(scores);
    std::ostringstream out;
    ScoreTable(graph, scores).write_csv(out);
    write_file(out_path(c, artifact::ppr_scores), out.str());
    log << "[ppr] converged in " << scores.iterations_used << " iterations (residual "
        << csv::format_double(scores.residual) << ")\n";
}

void stage_features(const PipelineConfig& c, std::ostream& log) {
    const SplitDataset split = load_split(c);
    auto in = open_input("features", out_path(c, artifact::ppr_scores), "ppr");
    const ScoreTable scores = ScoreTable::read_csv(in);
    const ChannelEncoder encoder = ChannelEncoder::fit(split.train);
    const FeatureMatrix fm = assemble_features(split, scores, encoder, c.features);
    std::ostringstream train_csv, test_csv;
    write_features(train_csv, fm.train);
    write_features(test_csv, fm.test);
    write_file(out_path(c, artifact::features_train), train_csv.str());
    write_file(out_path(c, artifact::features_test), test_csv.str());
    log << "[features] train rows=" << fm.train.size() << " test rows=" << fm.test.size() << "\n";
}

void stage_train(const PipelineConfig& c, std::ostream& log) {
    const auto rows = load_features("train", c, artifact::features_train);
    const auto labels = labels_of(rows);
    ordered_json doc;
    doc["models"] = ordered_json::array();
    for (const auto& [name, with_ppr] : models_for(c.mode)) {
        const LogisticModel model = fit_logistic(design_matrix(rows, with_ppr), labels, feature_names(with_ppr), c.train);
        if (model.single_class) log << "[train] warning: " << name << " saw a single class; intercept-only model\n";
        doc["models"].push_back({{"name", name}, {"model", ordered_json::parse(model_to_json(model))}});
        log << "[train] " << name << " epochs=" << model.epochs_run << " loss=" << csv::format_double(model.final_loss)
            << "\n";
    }
    write_file(out_path(c, artifact::model), doc.dump(2) + "\n");
}

void stage_evaluate(const PipelineConfig& c, std::ostream& log) {
    const auto rows = load_features("evaluate", c, artifact::features_test);
    const auto labels = labels_of(rows);
    const auto models = load_models("evaluate", c);

    ordered_json doc;
    doc["threshold"] = c.threshold;
    doc["n_test"] = rows.size();
    doc["n_test_positive"] = std::count(labels.begin(), labels.end(), 1);
    doc["models"] = ordered_json::object();
    std::ostringstream roc_csv, pr_csv;
    csv::write_record(roc_csv, {"model", "threshold", "fpr", "tpr"});
    csv::write_record(pr_csv, {"model", "threshold", "recall", "precision"});
    std::map<std::string, double> auc;

    for (const auto& [name, model] : models) {
        const bool with_ppr = model.weights.size() == kFullFeatureCount;
        const auto proba = predict_proba(model, design_matrix(rows, with_ppr));
        const MetricsReport r = evaluate(proba, labels, c.threshold);
        auc[name] = r.auc;
        const auto& m = r.confusion;
        ordered_json j;
        j["features"] = model.weights.size();
        j["auc"] = r.auc;
        j["average_precision"] = r.average_precision;
        j["accuracy"] = m.accuracy;
        j["precision"] = m.precision;
        j["recall"] = m.recall;
        j["precision_undefined"] = m.precision_undefined;
        j["recall_undefined"] = m.recall_undefined;
        j["weighted_precision"] = m.weighted_precision;
        j["weighted_recall"] = m.weighted_recall;
        j["confusion"] = {{"tp", m.tp}, {"fp", m.fp}, {"tn", m.tn}, {"fn", m.fn}};
        j["roc_points"] = points_json(r.roc_points);
        j["pr_points"] = points_json(r.pr_points);
        doc["models"][name] = j;
        for (const auto& p : r.roc_points)
            csv::write_record(roc_csv, {name, threshold_text(p.threshold), csv::format_double(p.x), csv::format_double(p.y)});
        for (const auto& p : r.pr_points)
            csv::write_record(pr_csv, {name, threshold_text(p.threshold), csv::format_double(p.x), csv::format_double(p.y)});
        log << "[evaluate] " << name << " auc=" << csv::format_double(r.auc)
            << " accuracy=" << csv::format_double(m.accuracy) << "\n";
    }
    if (auc.count(kBaseModelName) && auc.count(kPprModelName)) {
        doc["comparison"] = {{"auc_base", auc[kBaseModelName]},
                             {"auc_ppr", auc[kPprModelName]},
                             {"delta_auc", auc[kPprModelName] - auc[kBaseModelName]}};
        log << "[evaluate] delta_auc=" << csv::format_double(auc[kPprModelName] - auc[kBaseModelName]) << "\n";
    }
    write_file(out_path(c, artifact::metrics), doc.dump() + "\n");
    write_file(out_path(c, artifact::roc), roc_csv.str());
    write_file(out_path(c, artifact::pr), pr_csv.str());
}

void stage_psi(const PipelineConfig& c, std::ostream& log) {
    const auto train = load_features("psi", c, artifact::features_train);
    const auto test = load_features("psi", c, artifact::features_test);
    if (train.empty() || test.empty()) throw StageError("psi", "train and test feature sets must be non-empty");
    const Matrix a = design_matrix(train, true);
    const Matrix e = design_matrix(test, true);
    const auto names = feature_names(true);
    std::ostringstream out;
    csv::write_record(out, {"feature", "psi", "flag"});
    for (std::size_t col = 0; col < names.size(); ++col) {
        std::vector<double> actual(a.rows), expected(e.rows);
        for (std::size_t r = 0; r < a.rows; ++r) actual[r] = a(r, col);
        for (std::size_t r = 0; r < e.rows; ++r) expected[r] = e(r, col);
        const PsiResult res = psi(actual, expected, c.psi_bins);
        const char* flag = res.degenerate ? "degenerate" : (res.psi < 0.05 ? "stable" : "unstable");
        csv::write_record(out, {names[col], csv::format_double(res.psi), flag});
        log << "[psi] " << names[col] << " = " << csv::format_double(res.psi) << " (" << flag << ")\n";
    }
    write_file(out_path(c, artifact::psi), out.str());
}

void stage_report(const PipelineConfig& c, std::ostream& log) {
    const auto models = load_models("report", c);
    const auto metrics = ordered_json::parse(read_file("report", out_path(c, artifact::metrics), "evaluate"));
    if (models.empty()) throw StageError("report", "model.json holds no models");

    // The richest model supplies the importance table.
    const auto& primary = *std::max_element(models.begin(), models.end(), [](const auto& a, const auto& b) {
        return a.second.weights.size() < b.second.weights.size();
    });
    const auto ranking = feature_importance(primary.second);
    std::ostringstream imp;
    csv::write_record(imp, {"rank", "feature", "importance"});
    for (std::size_t i = 0; i < ranking.size(); ++i)
        csv::write_record(imp, {std::to_string(i + 1), ranking[i].feature, csv::format_double(ranking[i].importance)});
    write_file(out_path(c, artifact::importance), imp.str());
    write_file(out_path(c, artifact::importance_svg),
               render_importance_svg("Feature importance (" + primary.first + ")", ranking));

    std::vector<CurveSeries> roc, pr;
    for (const auto& [name, _] : models) {
        const auto& m = metrics.at("models").at(name);
        CurveSeries r{name + " (AUC " + csv::format_double(std::round(m.at("auc").get<double>() * 1000) / 1000) + ")", {}};
        for (const auto& p : m.at("roc_points")) r.points.emplace_back(p[0].get<double>(), p[1].get<double>());
        CurveSeries q{name, {}};
        for (const auto& p : m.at("pr_points")) q.points.emplace_back(p[0].get<double>(), p[1].get<double>());
        roc.push_back(std::move(r));
        pr.push_back(std::move(q));
    }
    write_file(out_path(c, artifact::roc_svg), render_curve_svg("ROC", "False positive rate", "True positive rate", roc, true));
    write_file(out_path(c, artifact::pr_svg), render_curve_svg("Precision-Recall", "Recall", "Precision", pr, false));

    std::ostringstream md;
    md << "# Fraud exposure report\n\n## Metrics (test set, threshold " << csv::format_double(c.threshold) << ")\n\n"
       << "| Model | Features | AUC | Avg. precision | Accuracy | Precision | Recall | Weighted precision | Weighted recall |\n"
       << "|---|---|---|---|---|---|---|---|---|\n";
    auto f4 = [](double v) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(4) << v;
        return s.str();
    };
    for (const auto& [name, _] : models) {
        const auto& m = metrics.at("models").at(name);
        md << "| " << name << " | " << m.at("features").get<std::size_t>() << " | " << f4(m.at("auc").get<double>())
           << " | " << f4(m.at("average_precision").get<double>()) << " | " << f4(m.at("accuracy").get<double>())
           << " | " << f4(m.at("precision").get<double>()) << (m.at("precision_undefined").get<bool>() ? " (undefined)" : "")
           << " | " << f4(m.at("recall").get<double>()) << " | " << f4(m.at("weighted_precision").get<double>())
           << " | " << f4(m.at("weighted_recall").get<double>()) << " |\n";
    }
    if (metrics.contains("comparison"))
        md << "\nAUC gain from the exposure feature: " << f4(metrics.at("comparison").at("delta_auc").get<double>()) << "\n";
    for (const auto& [name, model] : models) {
        md << "\n## Feature importance: " << name << "\n\n| Rank | Feature | abs(coefficient) |\n|---|---|---|\n";
        const auto ranked = feature_importance(model);
        for (std::size_t i = 0; i < ranked.size(); ++i)
            md << "| " << i + 1 << " | " << ranked[i].feature << " | " << f4(ranked[i].importance) << " |\n";
    }
    const auto psi_path = out_path(c, artifact::psi);
    if (fs::exists(psi_path)) {
        md << "\n## Feature stability (PSI, train vs test)\n\n| Feature | PSI | Flag |\n|---|---|---|\n";
        std::ifstream in(psi_path);
        std::string line;
        std::size_t line_no = 0;
        csv::next_line(in, line, line_no);
        while (csv::next_line(in, line, line_no)) {
            const auto f = csv::split_record(line);
            if (f && f->size() == 3) md << "| " << (*f)[0] << " | " << f4(csv::parse_double((*f)[1]).value_or(0)) << " | " << (*f)[2] << " |\n";
        }
    }
    write_file(out_path(c, artifact::report), md.str());
    log << "[report] importance table with " << ranking.size() << " rows from " << primary.first << "\n";
}

}  // namespace

StageError::StageError(std::string stage, const std::string& message)
    : std::runtime_error("[" + stage + "] " + message), stage_(std::move(stage)) {}

MissingIntermediate::MissingIntermediate(const std::string& stage, const fs::path& file, const std::string& producer)
    : StageError(stage, "missing intermediate '" + file.string() + "'; run `" + producer + "` first") {}

const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> names = {"synth", "graph-stats", "ppr", "features",
                                                   "train", "evaluate",    "psi", "report"};
    return names;
}

SplitDataset load_split(const PipelineConfig& config) {
    const fs::path path = config.input.empty() ? out_path(config, artifact::ledger) : config.input;
    if (config.input.empty() && !fs::exists(path)) throw MissingIntermediate("ingest", path, "synth");
    if (!fs::exists(path)) throw StageError("ingest", "input ledger '" + path.string() + "' does not exist");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StageError("ingest", "cannot open '" + path.string() + "'");
    try {
        const auto all = parse_ledger(in);
        const auto kept = filter_status(all, config.status);
        return chronological_split(kept, config.history_days, config.train_fraction);
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError("ingest", path.string() + ": " + e.what());
    }
}

void run_stage(const std::string& stage, const PipelineConfig& config, std::ostream& log) {
    static const std::map<std::string, void (*)(const PipelineConfig&, std::ostream&)> table = {
        {"synth", stage_synth},       {"graph-stats", stage_graph}, {"ppr", stage_ppr},
        {"features", stage_features}, {"train", stage_train},       {"evaluate", stage_evaluate},
        {"psi", stage_psi},           {"report", stage_report}};
    auto it = table.find(stage);
    if (it == table.end()) throw ConfigError("unknown stage '" + stage + "'");
    config.validate();
    try {
        fs::create_directories(config.output_dir);
        it->second(config, log);
        write_manifest(config.output_dir);
    } catch (const StageError&) {
        throw;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

void run_pipeline(const PipelineConfig& config, std::ostream& log) {
    for (const auto& stage : stage_names()) {
        if (stage == "synth" && !config.input.empty()) continue;
        run_stage(stage, config, log);
    }
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "' for hashing");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest init failed");
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return hex.str();
}

void write_manifest(const fs::path& output_dir) {
    static const std::vector<const char*> known = {
        artifact::ledger,   artifact::rings,      artifact::edges,      artifact::graph_stats, artifact::ppr_scores,
        artifact::features_train, artifact::features_test, artifact::model, artifact::metrics, artifact::roc,
        artifact::pr,       artifact::psi,        artifact::importance, artifact::roc_svg,     artifact::pr_svg,
        artifact::importance_svg, artifact::report};
    std::vector<std::string> names;
    for (const char* n : known)
        if (fs::exists(output_dir / n)) names.emplace_back(n);
    std::sort(names.begin(), names.end());
    ordered_json doc;
    doc["files"] = ordered_json::array();
    for (const auto& n : names)
        doc["files"].push_back({{"name", n}, {"bytes", fs::file_size(output_dir / n)}, {"sha256", sha256_file(output_dir / n)}});
    write_file(output_dir / artifact::manifest, doc.dump(2) + "\n");
}

}  // namespace pprfraud
