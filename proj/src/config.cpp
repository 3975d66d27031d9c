#include "pprfraud/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "pprfraud/csv.hpp"

namespace pprfraud {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& v) {
    auto x = csv::parse_double(v);
    if (!x) throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
    return *x;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
    auto x = csv::parse_int64(v);
    if (!x) throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
    return *x;
}

std::size_t to_count(const std::string& key, const std::string& v) {
    const auto x = to_int(key, v);
    if (x < 0) throw ConfigError("key '" + key + "': must be >= 0");
    return static_cast<std::size_t>(x);
}

std::vector<ChannelShare> to_channels(const std::string& key, const std::string& v) {
    std::vector<ChannelShare> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ';')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto colon = item.rfind(':');
        if (colon == std::string::npos)
            throw ConfigError("key '" + key + "': expected NAME:PROBABILITY entries separated by ';'");
        out.push_back({trim(item.substr(0, colon)), to_real(key, trim(item.substr(colon + 1)))});
    }
    return out;
}

std::string channels_text(const std::vector<ChannelShare>& channels) {
    std::string out;
    for (const auto& c : channels) {
        if (!out.empty()) out += "; ";
        out += c.name + ":" + csv::format_double(c.probability);
    }
    return out;
}

}  // namespace

const char* to_string(RunMode mode) {
    switch (mode) {
        case RunMode::baseline:
            return "baseline";
        case RunMode::with_ppr:
            return "with_ppr";
        case RunMode::both:
            return "both";
    }
    return "?";
}

RunMode parse_run_mode(const std::string& text) {
    if (text == "baseline") return RunMode::baseline;
    if (text == "with_ppr") return RunMode::with_ppr;
    if (text == "both") return RunMode::both;
    throw ConfigError("unknown mode '" + text + "' (expected baseline, with_ppr or both)");
}

void PipelineConfig::validate() const {
    try {
        if (input.empty()) pprfraud::validate(synth);
        ppr.validate();
        train.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (output_dir.empty()) throw ConfigError("output_dir must be set");
    if (history_days < 0) throw ConfigError("history_days must be >= 0");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
    if (features.window_days < 1) throw ConfigError("window_days must be >= 1");
    if (psi_bins < 1) throw ConfigError("psi_bins must be >= 1");
}

ConfigFile ConfigFile::parse(std::istream& in, const std::string& origin) {
    ConfigFile file;
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // ';' separates channel entries, so only '#' starts a trailing comment.
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty() || line.front() == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(origin + ":" + std::to_string(line_no) + ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const auto& keys = config_keys();
        auto it = std::find_if(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == key; });
        if (it == keys.end()) throw ConfigError(origin + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
        if (it->section != section)
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": key '" + key + "' belongs in [" +
                              it->section + "]");
        file.values_[key] = trim(line.substr(eq + 1));
    }
    return file;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    return parse(in, path.string());
}

void ConfigFile::set(const std::string& key, const std::string& value) {
    const auto& keys = config_keys();
    if (std::none_of(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == key; }))
        throw ConfigError("unknown key '" + key + "'");
    values_[key] = value;
}

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = {
        {"pipeline", "input", "ledger CSV path; empty uses the synthetic ledger"},
        {"pipeline", "output_dir", "directory for all artifacts"},
        {"pipeline", "mode", "baseline, with_ppr or both"},
        {"pipeline", "seed", "global seed; drives the synthetic generator"},
        {"synth", "n_accounts", "number of synthetic accounts"},
        {"synth", "n_transactions", "number of synthetic ledger rows"},
        {"synth", "span_days", "calendar days covered by the synthetic ledger"},
        {"synth", "fraud_rate", "probability that a synthetic row is fraudulent"},
        {"synth", "n_rings", "number of mule rings"},
        {"synth", "ring_size", "mule accounts per ring"},
        {"synth", "initiated_fraction", "share of rows with status Initiated"},
        {"synth", "channels", "NAME:PROBABILITY entries separated by ';'"},
        {"synth", "amount_mu", "lognormal amount location"},
        {"synth", "amount_sigma", "lognormal amount scale"},
        {"split", "status", "transaction status kept for modelling"},
        {"split", "history_days", "leading days used only as feature history"},
        {"split", "train_fraction", "share of post-history rows used for training"},
        {"features", "window_days", "sliding window length for time-window features"},
        {"features", "time_of_day_mode", "amount_ratio or hour_consistency"},
        {"features", "exposure_mode", "sum, max or creditor"},
        {"ppr", "alpha", "damping factor"},
        {"ppr", "tol", "L1 convergence tolerance"},
        {"ppr", "max_iter", "power iteration limit"},
        {"ppr", "weight_mode", "count, amount or unweighted"},
        {"ppr", "threads", "worker threads for the power iteration"},
        {"train", "learning_rate", "initial gradient step"},
        {"train", "l2_lambda", "L2 penalty on weights"},
        {"train", "max_epochs", "maximum accepted gradient steps"},
        {"train", "loss_tol", "relative loss change that stops training"},
        {"train", "class_weighting", "none or balanced"},
        {"evaluation", "psi_bins", "equal-frequency bins per feature"},
        {"evaluation", "threshold", "probability cut-off for confusion metrics"},
    };
    return keys;
}

PipelineConfig make_config(const ConfigFile& file) {
    PipelineConfig c;
    for (const auto& [key, v] : file.values()) {
        if (key == "input") c.input = v;
        else if (key == "output_dir") c.output_dir = v;
        else if (key == "mode") c.mode = parse_run_mode(v);
        else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_int(key, v));
        else if (key == "n_accounts") c.synth.n_accounts = to_count(key, v);
        else if (key == "n_transactions") c.synth.n_transactions = to_count(key, v);
        else if (key == "span_days") c.synth.span_days = static_cast<int>(to_int(key, v));
        else if (key == "fraud_rate") c.synth.fraud_rate = to_real(key, v);
        else if (key == "n_rings") c.synth.n_rings = to_count(key, v);
        else if (key == "ring_size") c.synth.ring_size = to_count(key, v);
        else if (key == "initiated_fraction") c.synth.initiated_fraction = to_real(key, v);
        else if (key == "channels") c.synth.channels = to_channels(key, v);
        else if (key == "amount_mu") c.synth.amount_mu = to_real(key, v);
        else if (key == "amount_sigma") c.synth.amount_sigma = to_real(key, v);
        else if (key == "status") c.status = v;
        else if (key == "history_days") c.history_days = static_cast<int>(to_int(key, v));
        else if (key == "train_fraction") c.train_fraction = to_real(key, v);
        else if (key == "window_days") c.features.window_days = static_cast<int>(to_int(key, v));
        else if (key == "time_of_day_mode") {
            try {
                c.features.time_of_day = parse_time_of_day_mode(v);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        } else if (key == "exposure_mode") {
            try {
                c.features.exposure = parse_exposure_mode(v);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        } else if (key == "alpha") c.ppr.alpha = to_real(key, v);
        else if (key == "tol") c.ppr.tol = to_real(key, v);
        else if (key == "max_iter") c.ppr.max_iter = to_count(key, v);
        else if (key == "weight_mode") {
            try {
                c.ppr.weight_mode = parse_weight_mode(v);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        } else if (key == "threads") c.ppr.threads = static_cast<unsigned>(to_count(key, v));
        else if (key == "learning_rate") c.train.learning_rate = to_real(key, v);
        else if (key == "l2_lambda") c.train.l2_lambda = to_real(key, v);
        else if (key == "max_epochs") c.train.max_epochs = to_count(key, v);
        else if (key == "loss_tol") c.train.loss_tol = to_real(key, v);
        else if (key == "class_weighting") {
            try {
                c.train.class_weighting = parse_class_weighting(v);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        } else if (key == "psi_bins") c.psi_bins = to_count(key, v);
        else if (key == "threshold") c.threshold = to_real(key, v);
        else throw ConfigError("unknown key '" + key + "'");
    }
    c.synth.seed = c.seed;
    return c;
}

std::string render_config(const PipelineConfig& c) {
    std::ostringstream out;
    out << "[pipeline]\n"
        << "input = " << c.input.string() << "\n"
        << "output_dir = " << c.output_dir.string() << "\n"
        << "mode = " << to_string(c.mode) << "\n"
        << "seed = " << c.seed << "\n\n"
        << "[synth]\n"
        << "n_accounts = " << c.synth.n_accounts << "\n"
        << "n_transactions = " << c.synth.n_transactions << "\n"
        << "span_days = " << c.synth.span_days << "\n"
        << "fraud_rate = " << csv::format_double(c.synth.fraud_rate) << "\n"
        << "n_rings = " << c.synth.n_rings << "\n"
        << "ring_size = " << c.synth.ring_size << "\n"
        << "initiated_fraction = " << csv::format_double(c.synth.initiated_fraction) << "\n"
        << "channels = " << channels_text(c.synth.channels) << "\n"
        << "amount_mu = " << csv::format_double(c.synth.amount_mu) << "\n"
        << "amount_sigma = " << csv::format_double(c.synth.amount_sigma) << "\n\n"
        << "[split]\n"
        << "status = " << c.status << "\n"
        << "history_days = " << c.history_days << "\n"
        << "train_fraction = " << csv::format_double(c.train_fraction) << "\n\n"
        << "[features]\n"
        << "window_days = " << c.features.window_days << "\n"
        << "time_of_day_mode = " << to_string(c.features.time_of_day) << "\n"
        << "exposure_mode = " << to_string(c.features.exposure) << "\n\n"
        << "[ppr]\n"
        << "alpha = " << csv::format_double(c.ppr.alpha) << "\n"
        << "tol = " << csv::format_double(c.ppr.tol) << "\n"
        << "max_iter = " << c.ppr.max_iter << "\n"
        << "weight_mode = " << to_string(c.ppr.weight_mode) << "\n"
        << "threads = " << c.ppr.threads << "\n\n"
        << "[train]\n"
        << "learning_rate = " << csv::format_double(c.train.learning_rate) << "\n"
        << "l2_lambda = " << csv::format_double(c.train.l2_lambda) << "\n"
        << "max_epochs = " << c.train.max_epochs << "\n"
        << "loss_tol = " << csv::format_double(c.train.loss_tol) << "\n"
        << "class_weighting = " << to_string(c.train.class_weighting) << "\n\n"
        << "[evaluation]\n"
        << "psi_bins = " << c.psi_bins << "\n"
        << "threshold = " << csv::format_double(c.threshold) << "\n";
    return out.str();
}

}  // namespace pprfraud
