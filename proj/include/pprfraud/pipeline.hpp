#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "pprfraud/config.hpp"
#include "pprfraud/ingest.hpp"

namespace pprfraud {

// Failure inside a named pipeline stage.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& message);
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

class MissingIntermediate : public StageError {
public:
    MissingIntermediate(const std::string& stage, const std::filesystem::path& file, const std::string& producer);
};

// Artifact file names inside the output directory.
namespace artifact {
inline constexpr const char* ledger = "ledger.csv";
inline constexpr const char* rings = "rings.csv";
inline constexpr const char* edges = "edges.csv";
inline constexpr const char* graph_stats = "graph_stats.json";
inline constexpr const char* ppr_scores = "ppr_scores.csv";
inline constexpr const char* features_train = "features_train.csv";
inline constexpr const char* features_test = "features_test.csv";
inline constexpr const char* model = "model.json";
inline constexpr const char* metrics = "metrics.json";
inline constexpr const char* roc = "roc.csv";
inline constexpr const char* pr = "pr.csv";
inline constexpr const char* psi = "psi.csv";
inline constexpr const char* importance = "importance.csv";
inline constexpr const char* roc_svg = "roc.svg";
inline constexpr const char* pr_svg = "pr.svg";
inline constexpr const char* importance_svg = "importance.svg";
inline constexpr const char* report = "report.md";
inline constexpr const char* manifest = "manifest.json";
}  // namespace artifact

inline constexpr const char* kBaseModelName = "LR_base";
inline constexpr const char* kPprModelName = "LR_ppr";

// Stage names in execution order.
const std::vector<std::string>& stage_names();

// Runs one stage from the cached intermediates in config.output_dir, then refreshes
// manifest.json. Progress lines go to `log`.
void run_stage(const std::string& stage, const PipelineConfig& config, std::ostream& log);

// synth (when no input ledger is configured) followed by every other stage.
void run_pipeline(const PipelineConfig& config, std::ostream& log);

// The ledger named by the config (or the synthetic one), filtered by status and split.
SplitDataset load_split(const PipelineConfig& config);

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& output_dir);

}  // namespace pprfraud
