#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "credit/features.hpp"
#include "credit/util.hpp"

namespace credit {

// ============================================================================
// Binning
// ============================================================================

/// Per-column inclusive upper bin edges; the last finite bin's edge is +inf.
/// Missing values go to the bin right after the finite ones.
struct BinMapper {
    std::vector<std::vector<double>> upper_edges;

    std::size_t columns() const { return upper_edges.size(); }
    std::size_t finite_bins(std::size_t col) const { return upper_edges[col].size(); }
    std::uint8_t missing_bin(std::size_t col) const { return static_cast<std::uint8_t>(upper_edges[col].size()); }
    std::uint8_t bin_of(std::size_t col, float value) const;
};

/// Quantile edges over each column's non-missing values. Columns with at
/// most max_bins distinct values get one bin per value.
BinMapper build_bins(const FeatureMatrix& matrix, int max_bins);

// ============================================================================
// Configuration and model
// ============================================================================

struct TrainConfig {
    int rounds = 100;
    double learning_rate = 0.1;
    int max_leaves = 31;
    double min_child_weight = 1.0;
    double l2_lambda = 1.0;
    double goss_a = 1.0; // 1 disables GOSS
    double goss_b = 0.0;
    int max_bins = 255;
    std::uint64_t seed = 0;
    std::optional<int> early_stop_rounds;
    int threads = 1; // histogram workers; never changes the result

    void validate() const;
};

/// Recognized keys mirror the field names; "goss": true selects a = 0.2,
/// b = 0.1 unless goss_a / goss_b are given.
TrainConfig train_config_from_json(const Json& doc);
Json to_json(const TrainConfig& config);

struct TreeNode {
    bool is_leaf = true;
    double leaf_value = 0.0; // log-odds increment, learning rate applied
    int feature = -1;        // index into BoostedModel::feature_names
    int threshold_bin = -1;  // rows with bin <= threshold_bin go left
    double threshold = 0.0;  // same rule on raw values: value <= threshold
    bool missing_left = true;
    int left = -1;
    int right = -1;
    double gain = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes; // nodes[0] is the root
};

struct SplitRecord {
    std::string column;
    double gain = 0.0;
};

struct BoostedModel {
    double base_score = 0.0; // log-odds
    double learning_rate = 0.1;
    std::vector<Tree> trees;
    std::vector<SplitRecord> split_records; // tree order, node order
    std::vector<std::string> feature_names; // training columns
};

Json model_to_json(const BoostedModel& model);
BoostedModel model_from_json(const Json& doc);
void save_model(const std::filesystem::path& path, const BoostedModel& model);
BoostedModel load_model(const std::filesystem::path& path);

// ============================================================================
// Training primitives
// ============================================================================

struct GradientPair {
    double g = 0.0;
    double h = 0.0;
};

double sigmoid(double score);

/// p = sigmoid(score), g = p - y, h = p (1 - p).
std::vector<GradientPair> logistic_grad_hess(std::span<const int> labels, std::span<const double> scores);

struct GossSample {
    std::vector<std::size_t> rows;  // ascending
    std::vector<double> multipliers; // aligned with rows
};

/// Keeps the ceil(a n) rows of largest |g| (multiplier 1) plus ceil(b n)
/// rows drawn without replacement from the rest (multiplier (1 - a) / b).
/// a = 1 keeps everything. Throws DegenerateSampling for a < 1 with b = 0.
GossSample goss_sample(std::span<const GradientPair> grads, double a, double b, std::uint64_t seed);

struct Holdout {
    const FeatureMatrix& matrix;
    std::span<const int> labels;
};

/// Leaf-wise histogram boosting with logistic loss. Early stopping, when
/// configured and a holdout is given, monitors the composite metric M and
/// keeps the best prefix of trees.
BoostedModel train(const FeatureMatrix& matrix, std::span<const int> labels, const TrainConfig& config,
                   const std::optional<Holdout>& valid = std::nullopt);

/// Raw log-odds. `tree_limit` restricts scoring to the first trees.
std::vector<double> predict_raw(const BoostedModel& model, const FeatureMatrix& matrix,
                                std::optional<std::size_t> tree_limit = std::nullopt);

std::vector<double> predict(const BoostedModel& model, const FeatureMatrix& matrix,
                            std::optional<std::size_t> tree_limit = std::nullopt);

enum class ImportanceKind { AverageGain, TotalGain };

ImportanceKind importance_kind_from(const std::string& s);
std::string_view to_string(ImportanceKind kind);

/// Columns the model never split on are absent.
std::map<std::string, double> importance(const BoostedModel& model, ImportanceKind kind);

/// Divides every value by the grand total (empty stays empty).
std::map<std::string, double> normalize_importance(const std::map<std::string, double>& values);

} // namespace credit
