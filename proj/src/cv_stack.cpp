#include "credit/cv_stack.hpp"

#include <algorithm>
#include <cmath>

#include "credit/error.hpp"

namespace credit {

std::vector<std::size_t> FoldPlan::rows_in(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] == fold) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldPlan::rows_not_in(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] != fold) out.push_back(i);
    }
    return out;
}

FoldPlan make_folds(std::span<const int> labels, int k, std::uint64_t seed) {
    if (k < 2) throw Error(ErrorCode::InvalidConfig, "fold count must be >= 2");
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) {
            pos.push_back(i);
        } else if (labels[i] == 0) {
            neg.push_back(i);
        } else {
            throw Error(ErrorCode::InvalidData, "label at row " + std::to_string(i) + " is not binary");
        }
    }
    const auto kk = static_cast<std::size_t>(k);
    if (pos.size() < kk || neg.size() < kk) {
        throw Error(ErrorCode::TooFewPerClass, std::to_string(pos.size()) + " positives / " + std::to_string(neg.size()) +
                                                   " negatives for " + std::to_string(k) + " folds");
    }
    Rng rng(seed);
    rng.shuffle(pos);
    rng.shuffle(neg);

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignment.assign(labels.size(), 0);
    std::size_t slot = 0;
    for (std::size_t i : pos) plan.assignment[i] = static_cast<int>(slot++ % kk);
    for (std::size_t i : neg) plan.assignment[i] = static_cast<int>(slot++ % kk);
    return plan;
}

std::string fold_plan_to_csv(const FoldPlan& plan) {
    std::string out = "row_index,fold\n";
    for (std::size_t i = 0; i < plan.assignment.size(); ++i) {
        out += std::to_string(i) + "," + std::to_string(plan.assignment[i]) + "\n";
    }
    return out;
}

FoldPlan fold_plan_from_csv(std::string_view text, int k) {
    const CsvFile csv = parse_csv_text(text, "fold plan");
    FoldPlan plan;
    plan.k = k;
    plan.assignment.assign(csv.rows.size(), -1);
    for (const auto& rec : csv.rows) {
        std::int64_t row = -1;
        std::int64_t fold = -1;
        if (rec.size() < 2 || !parse_int64(rec[0], row) || !parse_int64(rec[1], fold) || row < 0 ||
            static_cast<std::size_t>(row) >= plan.assignment.size() || fold < 0 || fold >= k) {
            throw Error(ErrorCode::InvalidData, "bad fold plan record");
        }
        plan.assignment[static_cast<std::size_t>(row)] = static_cast<int>(fold);
    }
    if (std::find(plan.assignment.begin(), plan.assignment.end(), -1) != plan.assignment.end()) {
        throw Error(ErrorCode::InvalidData, "fold plan does not cover every row");
    }
    return plan;
}

OofResult train_oof(const FeatureMatrix& matrix, std::span<const int> labels, const FoldPlan& plan,
                    const TrainConfig& config) {
    if (plan.assignment.size() != matrix.rows() || labels.size() != matrix.rows()) {
        throw Error(ErrorCode::LengthMismatch, "fold plan, labels and matrix disagree on row count");
    }
    OofResult result;
    result.oof.prediction.assign(matrix.rows(), kNaN);
    result.oof.fold.assign(matrix.rows(), -1);
    for (int f = 0; f < plan.k; ++f) {
        const auto train_idx = plan.rows_not_in(f);
        const auto pred_idx = plan.rows_in(f);
        std::vector<int> train_labels;
        train_labels.reserve(train_idx.size());
        for (std::size_t i : train_idx) train_labels.push_back(labels[i]);

        BoostedModel model;
        try {
            TrainConfig fold_config = config;
            fold_config.seed = config.seed + static_cast<std::uint64_t>(f);
            model = train(matrix.select_rows(train_idx), train_labels, fold_config);
        } catch (const Error& e) {
            throw Error(e.code(), "fold " + std::to_string(f) + ": " + e.what());
        }
        const auto preds = predict(model, matrix.select_rows(pred_idx));
        for (std::size_t j = 0; j < pred_idx.size(); ++j) {
            result.oof.prediction[pred_idx[j]] = preds[j];
            result.oof.fold[pred_idx[j]] = f;
        }
        result.models.push_back(std::move(model));
        result.train_rows.push_back(train_idx);
    }
    return result;
}

std::size_t count_meta_columns(const FeatureMatrix& matrix) {
    return static_cast<std::size_t>(std::count_if(matrix.column_names.begin(), matrix.column_names.end(),
                                                  [](const std::string& n) { return n.rfind("meta_", 0) == 0; }));
}

FeatureMatrix append_meta(const FeatureMatrix& matrix, std::span<const std::vector<double>> oof_columns) {
    for (const auto& col : oof_columns) {
        if (col.size() != matrix.rows()) {
            throw Error(ErrorCode::LengthMismatch, "meta column has " + std::to_string(col.size()) + " values for " +
                                                       std::to_string(matrix.rows()) + " rows");
        }
    }
    FeatureMatrix out = matrix;
    std::size_t next = count_meta_columns(matrix);
    for (const auto& col : oof_columns) {
        std::vector<float> data(col.begin(), col.end());
        out.add_column("meta_" + std::to_string(next++), data);
    }
    return out;
}

std::vector<double> predict_with_fold_models(std::span<const BoostedModel> models, const FeatureMatrix& matrix) {
    if (models.empty()) throw Error(ErrorCode::InvalidConfig, "no fold models to average");
    std::vector<double> sum(matrix.rows(), 0.0);
    std::vector<double> lo(matrix.rows(), 1.0);
    std::vector<double> hi(matrix.rows(), 0.0);
    for (const auto& model : models) {
        const auto p = predict(model, matrix);
        for (std::size_t i = 0; i < p.size(); ++i) {
            sum[i] += p[i];
            lo[i] = std::min(lo[i], p[i]);
            hi[i] = std::max(hi[i], p[i]);
        }
    }
    const auto k = static_cast<double>(models.size());
    // The clamp only absorbs rounding; identical members give back their value.
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = std::clamp(sum[i] / k, lo[i], hi[i]);
    return sum;
}

OofResult train_meta(const FeatureMatrix& augmented, std::span<const int> labels, const FoldPlan& plan,
                     const TrainConfig& config) {
    if (count_meta_columns(augmented) == 0) throw Error(ErrorCode::NoMetaColumns, "meta model needs at least one meta_ column");
    return train_oof(augmented, labels, plan, config);
}

} // namespace credit
