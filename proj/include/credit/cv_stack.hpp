#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "credit/features.hpp"
#include "credit/gbdt.hpp"

namespace credit {

/// Stratified assignment of rows to k folds.
struct FoldPlan {
    int k = 5;
    std::vector<int> assignment; // per row, 0..k-1
    std::uint64_t seed = 0;

    std::vector<std::size_t> rows_in(int fold) const;
    std::vector<std::size_t> rows_not_in(int fold) const;
};

/// Positives then negatives, each shuffled by seed, dealt round-robin as one
/// continuing sequence. Throws TooFewPerClass if a class has fewer than k rows.
FoldPlan make_folds(std::span<const int> labels, int k, std::uint64_t seed);

std::string fold_plan_to_csv(const FoldPlan& plan);
FoldPlan fold_plan_from_csv(std::string_view text, int k);

struct OofVector {
    std::vector<double> prediction;
    std::vector<int> fold; // fold whose model produced the row
};

struct OofResult {
    OofVector oof;
    std::vector<BoostedModel> models;                  // one per fold
    std::vector<std::vector<std::size_t>> train_rows;  // index set each model saw
};

/// Fold f's model trains on every row outside f and predicts the rows of f.
/// Training errors are rethrown with the fold named.
OofResult train_oof(const FeatureMatrix& matrix, std::span<const int> labels, const FoldPlan& plan,
                    const TrainConfig& config);

/// Adds `meta_<j>` columns, numbered after any existing meta columns.
FeatureMatrix append_meta(const FeatureMatrix& matrix, std::span<const std::vector<double>> oof_columns);

/// Mean of the fold models' probabilities per row.
std::vector<double> predict_with_fold_models(std::span<const BoostedModel> models, const FeatureMatrix& matrix);

/// Second-stage model on features plus meta columns, cross-fitted with the
/// same plan. Throws NoMetaColumns when the matrix carries none.
OofResult train_meta(const FeatureMatrix& augmented, std::span<const int> labels, const FoldPlan& plan,
                     const TrainConfig& config);

std::size_t count_meta_columns(const FeatureMatrix& matrix);

} // namespace credit
