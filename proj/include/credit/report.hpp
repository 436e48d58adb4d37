#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "credit/gbdt.hpp"
#include "credit/util.hpp"

namespace credit {

/// Order statistics of one column's importance across folds. A fold that
/// never split on the column contributes 0.
struct ColumnSummary {
    std::string column;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

struct ImportanceReport {
    ImportanceKind kind = ImportanceKind::TotalGain;
    std::vector<std::map<std::string, double>> per_fold;
    std::vector<ColumnSummary> columns; // by column name
    /// Columns by descending fold-summed normalized importance, paired with
    /// the running share; the last share is 1.
    std::vector<std::pair<std::string, double>> cumulative;
};

/// Needs k >= 2 models trained on the same column list (ColumnSetMismatch).
ImportanceReport build_importance_report(std::span<const BoostedModel> models, ImportanceKind kind);

Json to_json(const ImportanceReport& report);
std::string summary_to_csv(const ImportanceReport& report);

/// Linear-interpolation quantile of sorted values, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

/// Standalone SVG: the top_n columns by median importance, each drawn as a
/// <g class="feature"> with a quartile box, min/max whiskers, and median
/// tick. Byte-identical for equal reports. Throws EmptyReport.
std::string render_box_plot(const ImportanceReport& report, std::size_t top_n);

} // namespace credit
