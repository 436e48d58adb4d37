#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "credit/ingest.hpp"
#include "credit/util.hpp"

namespace credit {

enum class ContinuousStat { Mean, Std, Min, Max, Last, Median };
enum class CategoricalStat { Count, Last, Nunique };
enum class Encoding { None, Ordinal, OneHot };
enum class MissingFill { None, Zero };

std::string_view to_string(ContinuousStat s);
std::string_view to_string(CategoricalStat s);
std::string_view to_string(Encoding e);

struct AggregationSpec {
    std::vector<ContinuousStat> continuous_stats;
    std::vector<CategoricalStat> categorical_stats;
    bool lag_enabled = false;
    std::optional<int> recent_window;
    Encoding encoding = Encoding::None;
    MissingFill fill = MissingFill::None;
    /// Raw columns to engineer; empty means every continuous/categorical column.
    std::vector<std::string> include_columns;

    /// Throws EmptySpec when nothing would be emitted, InvalidConfig for a
    /// window below 1.
    void validate() const;

    /// mean/std/min/max/last/median, count/last/nunique, lag on.
    static AggregationSpec full();
};

AggregationSpec aggregation_spec_from_json(const Json& doc);
Json to_json(const AggregationSpec& spec);

/// One row per customer, row-major 32-bit floats, NaN = missing.
struct FeatureMatrix {
    std::vector<std::string> customer_ids;
    std::vector<std::string> column_names;
    std::vector<float> values;

    std::size_t rows() const { return customer_ids.size(); }
    std::size_t cols() const { return column_names.size(); }
    float at(std::size_t row, std::size_t col) const { return values[row * cols() + col]; }
    float& at(std::size_t row, std::size_t col) { return values[row * cols() + col]; }

    std::optional<std::size_t> column_index(std::string_view name) const;
    std::vector<float> column(std::size_t col) const;
    FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
    FeatureMatrix select_columns(std::span<const std::string> names) const;
    /// Appends a column; throws LengthMismatch or InvalidData on a duplicate name.
    void add_column(const std::string& name, std::span<const float> data);
};

// ============================================================================
// Aggregations
// ============================================================================

/// Statistics over one customer's values of one continuous column. NaN
/// entries are dropped first. Empty series -> all NaN; std of one value -> NaN.
struct ContinuousAggregates {
    double mean = kNaN;
    double std = kNaN; // sample, divisor n - 1
    double min = kNaN;
    double max = kNaN;
    double last = kNaN;
    double median = kNaN;

    double get(ContinuousStat s) const;
};

ContinuousAggregates aggregate_continuous(std::span<const double> series);

struct CategoricalAggregates {
    double count = 0.0;
    double last = kNaN;
    double nunique = 0.0;

    double get(CategoricalStat s) const;
};

/// NaN entries are missing codes.
CategoricalAggregates aggregate_categorical(std::span<const double> series);

/// last - mean; NaN if either side is NaN.
double lag_value(double last, double mean);

/// Keeps each customer's k most recent statements, re-indexed 1..min(k, n).
StatementTable select_recent_window(const StatementTable& table, int k);

// ============================================================================
// Categorical encoding
// ============================================================================

/// Training-split code vocabulary per raw categorical column (codes sorted).
struct CategoricalVocabulary {
    std::map<std::string, std::vector<std::int32_t>> codes;
};

Json to_json(const CategoricalVocabulary& vocab);
CategoricalVocabulary vocabulary_from_json(const Json& doc);

struct CategoricalLast {
    std::string raw;
    std::vector<double> last; // per matrix row, NaN = missing
};

CategoricalVocabulary fit_vocabulary(std::span<const CategoricalLast> inputs);

/// Ordinal: adds `<raw>_code`. One-hot: adds `<raw>_is_<v>` for each
/// vocabulary code v; unseen codes and missing give an all-zero row.
/// One-hot without a vocabulary throws VocabularyMissing.
void encode_categorical(FeatureMatrix& matrix, std::span<const CategoricalLast> inputs, Encoding mode,
                        const CategoricalVocabulary* vocabulary);

// ============================================================================
// Matrix assembly
// ============================================================================

struct BuildOptions {
    /// Reused for one-hot columns when set (test split).
    const CategoricalVocabulary* vocabulary = nullptr;
    /// Fit a vocabulary from this table when none is given (training split).
    bool fit_vocabulary = true;
};

struct BuiltMatrix {
    FeatureMatrix matrix;
    CategoricalVocabulary vocabulary;
    std::vector<int> labels; // aligned with matrix rows; empty without labels
};

/// Window restriction, then per-customer aggregation, lag, and encoding.
/// Columns are ordered by raw column, then stat in spec order, then lag or
/// encoding columns. Rows follow the table's customer order.
BuiltMatrix build_matrix(const StatementTable& table, const AggregationSpec& spec, const BuildOptions& options = {});
BuiltMatrix build_matrix(const LabeledTable& labeled, const AggregationSpec& spec, const BuildOptions& options = {});

// ============================================================================
// CSFM container
// ============================================================================

/// "CSFM", u32 version, u64 rows, u64 cols, column names (u32 length +
/// UTF-8), customer ids (same encoding), row-major f32 payload. All
/// integers little-endian; missing cells are written as 0x7FC00000.
std::string serialize_matrix(const FeatureMatrix& matrix);
FeatureMatrix deserialize_matrix(std::string_view bytes);
void save_matrix(const std::filesystem::path& path, const FeatureMatrix& matrix);
FeatureMatrix load_matrix(const std::filesystem::path& path);

} // namespace credit
