#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "credit/util.hpp"

namespace credit {

// ============================================================================
// Schema
// ============================================================================

enum class ColumnKind { Continuous, Categorical, Identifier, Date };
enum class Storage { Int8, Int16, Float32 };

struct ValidRange {
    double low = 0.0;
    double high = 0.0;
};

struct ColumnSchema {
    std::string name;
    ColumnKind kind = ColumnKind::Continuous;
    Storage storage = Storage::Float32;
    std::optional<ValidRange> valid_range; // inclusive, raw units
};

using Schema = std::vector<ColumnSchema>;

/// Parses a schema document: array of {name, kind, storage, valid_range?}.
/// Throws InvalidConfig unless exactly one identifier column exists and all
/// ranges satisfy low <= high.
Schema schema_from_json(const Json& doc);
Json schema_to_json(const Schema& schema);
Schema load_schema(const std::filesystem::path& path);

std::string_view to_string(ColumnKind kind);
std::string_view to_string(Storage storage);

// ============================================================================
// Statement table
// ============================================================================

/// Reserved code for a missing categorical cell.
inline constexpr std::int32_t kMissingCode = -1;

/// Typed column payload. Continuous cells use NaN as the missing marker,
/// categorical cells use kMissingCode. Dates are days since 1970-01-01.
/// The identifier column carries no payload (ids live on the table).
using ColumnData = std::variant<std::monostate,
                                std::vector<double>,
                                std::vector<float>,
                                std::vector<std::int32_t>,
                                std::vector<std::int16_t>,
                                std::vector<std::int8_t>>;

struct Column {
    ColumnData data;

    std::size_t size() const;
    /// Cell as double; NaN for any missing marker.
    double value(std::size_t row) const;
    bool is_missing(std::size_t row) const;
    /// Width actually used to hold the values.
    std::string_view storage_name() const;
};

/// Long-format table. Rows are grouped by customer (first-appearance order
/// in the source) and sorted by statement date inside each group;
/// statement_index runs 1..n per customer.
struct StatementTable {
    Schema schema;
    std::vector<std::string> customer_ids;
    std::vector<std::int32_t> statement_index;
    std::vector<Column> columns; // aligned with schema

    std::size_t rows() const { return customer_ids.size(); }
    std::optional<std::size_t> column_index(std::string_view name) const;
    std::size_t identifier_column() const;

    /// Half-open [begin, end) row ranges, one per customer, in table order.
    std::vector<std::pair<std::size_t, std::size_t>> customer_ranges() const;
    std::vector<std::string> customers() const;
};

struct LabeledTable {
    StatementTable table;
    std::vector<std::string> customers; // table order
    std::vector<int> target;            // aligned with customers
    std::size_t unmatched_labels = 0;   // labels with no customer in the table
};

inline constexpr int kMaxStatements = 13;

// ============================================================================
// Operations
// ============================================================================

/// Parses CSV text against a schema. The header must equal the schema names
/// in order. Empty or unparseable cells become missing.
StatementTable parse_csv_text(std::string_view text, const Schema& schema,
                              const std::string& source = "<memory>");
StatementTable parse_csv(const std::filesystem::path& path, const Schema& schema);

/// Rounds non-missing continuous cells to the nearest multiple of
/// `precision`, ties away from zero. An empty `columns` list means every
/// continuous column.
StatementTable denoise_round(const StatementTable& table, double precision,
                             std::span<const std::string> columns = {});

/// Continuous -> 32-bit float; categorical -> the wider of the schema hint
/// and the narrowest signed width holding the largest observed code.
StatementTable compact_types(const StatementTable& table, const Schema& schema);

struct MaskResult {
    StatementTable table;
    std::vector<std::size_t> masked; // per schema column
};

/// Continuous cells outside the column's inclusive valid_range become NaN.
MaskResult mask_outliers(const StatementTable& table, const Schema& schema);

using LabelMap = std::map<std::string, int>;

/// The given rows, in that order, keeping their statement_index.
StatementTable select_statement_rows(const StatementTable& table, std::span<const std::size_t> rows);

/// Customers at the given positions of `labeled.customers`, in that order.
LabeledTable select_customers(const LabeledTable& labeled, std::span<const std::size_t> positions);

LabeledTable join_labels(const StatementTable& table, const LabelMap& labels);

/// Reads a two-column (customer_id, target) CSV.
LabelMap load_labels(const std::filesystem::path& path);
LabelMap labels_from_csv_text(std::string_view text, const std::string& source = "<memory>");

/// Writes the table back out in the dialect parse_csv reads. Float-stored
/// cells print the shortest text that round-trips at float width.
std::string table_to_csv(const StatementTable& table);

/// ISO-8601 calendar date <-> days since 1970-01-01.
std::optional<std::int32_t> parse_iso_date(std::string_view text);
std::string format_iso_date(std::int32_t days);

} // namespace credit
