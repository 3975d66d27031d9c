// Command-line driver for the fraud exposure pipeline.
//
//   pprfraud run --config configs/synthetic.ini
//   pprfraud ppr --config configs/synthetic.ini --alpha 0.9
//
// Exit codes: 0 success, 1 configuration error, 2 stage failure.

#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "pprfraud/config.hpp"
#include "pprfraud/pipeline.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kStageFailure = 2;

struct Overrides {
    std::string config_path;
    std::map<std::string, std::string> values;
};

void add_config_options(CLI::App& cmd, Overrides& overrides) {
    cmd.add_option("--config", overrides.config_path, "configuration file");
    for (const auto& key : pprfraud::config_keys())
        cmd.add_option("--" + key.name, overrides.values[key.name], "[" + key.section + "] " + key.help);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Personalized PageRank fraud exposure pipeline"};
    app.require_subcommand(1);

    Overrides overrides;
    std::vector<std::pair<CLI::App*, std::string>> commands;
    auto add = [&](const std::string& name, const std::string& description) {
        CLI::App* cmd = app.add_subcommand(name, description);
        add_config_options(*cmd, overrides);
        commands.emplace_back(cmd, name);
    };
    add("run", "run every stage end to end");
    add("synth", "write a synthetic ledger.csv and rings.csv");
    add("graph-stats", "build the account graph from history + train, write edges.csv");
    add("ppr", "personalized PageRank over edges.csv, write ppr_scores.csv");
    add("features", "write features_train.csv and features_test.csv");
    add("train", "fit logistic regression models, write model.json");
    add("evaluate", "score the test set, write metrics.json, roc.csv, pr.csv");
    add("psi", "feature stability between train and test, write psi.csv");
    add("report", "importance table, SVG plots and report.md");
    CLI::App* defaults = app.add_subcommand("default-config", "print the default configuration file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }
    if (defaults->parsed()) {
        std::cout << pprfraud::render_config({});
        return 0;
    }

    std::string command;
    CLI::App* parsed = nullptr;
    for (const auto& [cmd, name] : commands)
        if (cmd->parsed()) {
            command = name;
            parsed = cmd;
        }

    pprfraud::PipelineConfig config;
    try {
        pprfraud::ConfigFile file;
        if (!overrides.config_path.empty()) file = pprfraud::ConfigFile::load(overrides.config_path);
        for (const auto& key : pprfraud::config_keys())
            if (parsed->count("--" + key.name) > 0) file.set(key.name, overrides.values[key.name]);
        config = pprfraud::make_config(file);
        config.validate();
    } catch (const pprfraud::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    }

    try {
        if (command == "run") {
            pprfraud::run_pipeline(config, std::cout);
        } else {
            pprfraud::run_stage(command, config, std::cout);
        }
    } catch (const pprfraud::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kStageFailure;
    }
    return 0;
}
