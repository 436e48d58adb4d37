#pragma once

#include <cstddef>
#include <span>

#include "credit/util.hpp"

namespace credit {

/// Negative-label weight; offsets a 5% negative subsample (20 = 1 / 0.05).
inline constexpr double kNegativeWeight = 20.0;
/// Fraction of total weight examined by the top-capture statistic.
inline constexpr double kCaptureFraction = 0.04;

struct MetricOptions {
    double negative_weight = kNegativeWeight;
    double capture_fraction = kCaptureFraction;
};

struct MetricReport {
    double G = 0.0;
    double D = 0.0;
    double M = 0.0;
    double auc_w = 0.0;
    std::size_t n_rows = 0;
    std::size_t n_pos = 0;
    double total_weight = 0.0;
};

Json to_json(const MetricReport& report);

double weight_of(int label, const MetricOptions& opt = {});

/// Weighted pairwise AUC (ties count one half), by an O(n log n) sweep over
/// tie groups. Throws SingleClass unless both labels occur.
double weighted_auc(std::span<const int> labels, std::span<const double> preds, const MetricOptions& opt = {});

/// 2 * weighted_auc - 1.
double normalized_weighted_gini(std::span<const int> labels, std::span<const double> preds,
                                const MetricOptions& opt = {});

/// Share of positives among the top-ranked rows (prediction descending,
/// row index ascending on ties) whose running weight stays within
/// capture_fraction of the total weight. Throws NoPositives.
double default_rate_at_4pct(std::span<const int> labels, std::span<const double> preds,
                            const MetricOptions& opt = {});

/// G, D, M = 0.5 (G + D), and counts. M is not clipped; its attainable
/// range is [-0.5, 1].
MetricReport amex_metric(std::span<const int> labels, std::span<const double> preds, const MetricOptions& opt = {});

} // namespace credit
