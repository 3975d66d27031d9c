#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pprfraud/exposure.hpp"
#include "pprfraud/features.hpp"
#include "pprfraud/model.hpp"
#include "pprfraud/synth.hpp"

namespace pprfraud {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class RunMode { baseline, with_ppr, both };

const char* to_string(RunMode mode);
RunMode parse_run_mode(const std::string& text);

struct PipelineConfig {
    // Ledger CSV to read. Empty means the synthetic ledger written by `synth`.
    std::filesystem::path input;
    std::filesystem::path output_dir = "out";
    RunMode mode = RunMode::both;
    std::uint64_t seed = 42;

    SynthConfig synth;
    std::string status = "Initiated";
    int history_days = 14;
    double train_fraction = 0.7;
    FeatureOptions features;
    PprParams ppr;
    TrainParams train;
    std::size_t psi_bins = 10;
    double threshold = 0.5;

    void validate() const;
};

/**
 * Flat key/value settings grouped in [sections].
 *
 *     [split]
 *     history_days = 14   # trailing comments allowed
 *
 * Every key name is unique across sections, so a key can also be given on the
 * command line as --key value.
 */
class ConfigFile {
public:
    static ConfigFile parse(std::istream& in, const std::string& origin = "<config>");
    static ConfigFile load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value);
    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

struct ConfigKey {
    std::string section;
    std::string name;
    std::string help;
};

// Every recognized key, in documentation order.
const std::vector<ConfigKey>& config_keys();

// Applies recognized keys on top of the defaults; unknown keys raise ConfigError.
PipelineConfig make_config(const ConfigFile& file);

// The effective configuration rendered back as a config file.
std::string render_config(const PipelineConfig& config);

}  // namespace pprfraud
