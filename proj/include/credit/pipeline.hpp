#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "credit/features.hpp"
#include "credit/gbdt.hpp"
#include "credit/metric.hpp"
#include "credit/util.hpp"

namespace credit {

struct MemberConfig {
    std::string name;
    /// Falls back to the pipeline-wide spec when unset.
    std::optional<AggregationSpec> features;
    TrainConfig learner;
    /// Earlier members whose out-of-fold predictions become meta columns.
    std::vector<std::string> meta_from;
    /// Holdout predictions from one model refit on every training row
    /// instead of the mean of the fold models.
    bool refit = false;
};

struct ReportConfig {
    bool importance = true;
    ImportanceKind kind = ImportanceKind::TotalGain;
    std::size_t top_n = 20;
};

struct PipelineConfig {
    std::filesystem::path data;
    std::filesystem::path labels;
    std::filesystem::path schema;
    std::filesystem::path output_dir;

    double precision = 0.01;
    std::vector<std::string> denoise_columns; // empty: every continuous column
    int folds = 5;
    std::uint64_t seed = 0;
    double holdout_fraction = 0.2;
    double blend_step = 0.01;
    AggregationSpec features = AggregationSpec::full();
    std::vector<MemberConfig> members;
    ReportConfig reports;
    /// Worker count; never changes any output byte.
    int threads = 1;

    /// Throws InvalidConfig (or EmptySpec from a feature spec).
    void validate() const;
};

/// Relative paths in the document resolve against `base_dir`.
PipelineConfig pipeline_config_from_json(const Json& doc, const std::filesystem::path& base_dir = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
/// Echo of the resolved configuration; leaves out `threads` and
/// `output_dir` so relocated runs stay byte-identical.
Json to_json(const PipelineConfig& config);

struct MemberResult {
    std::string name;
    MetricReport oof;
    MetricReport holdout;
};

struct PipelineResult {
    std::filesystem::path run_dir;
    std::vector<MemberResult> members;
    MetricReport ensemble_oof;
    MetricReport ensemble_holdout;
    std::vector<double> weights;
    std::vector<std::string> files; // run-relative, sorted, manifest excluded
};

/// prep -> holdout split -> per-member features -> out-of-fold training
/// (meta members stack on earlier members) -> blend weight search on the
/// out-of-fold predictions -> evaluation -> reports -> manifest. Errors
/// carry the failing stage in their message.
PipelineResult run_pipeline(const PipelineConfig& config);

/// Reads the customer_id,probability dialect.
std::vector<std::pair<std::string, double>> read_predictions(const std::filesystem::path& path);
std::string predictions_to_csv(const std::vector<std::string>& customers, const std::vector<double>& probabilities);

} // namespace credit
