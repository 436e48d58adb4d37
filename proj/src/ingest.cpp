#include "credit/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "credit/error.hpp"

namespace credit {

namespace {

ColumnKind kind_from_string(const std::string& s) {
    if (s == "continuous") return ColumnKind::Continuous;
    if (s == "categorical") return ColumnKind::Categorical;
    if (s == "identifier") return ColumnKind::Identifier;
    if (s == "date") return ColumnKind::Date;
    throw Error(ErrorCode::InvalidConfig, "unknown column kind '" + s + "'");
}

Storage storage_from_string(const std::string& s) {
    if (s == "int8") return Storage::Int8;
    if (s == "int16") return Storage::Int16;
    if (s == "float32") return Storage::Float32;
    throw Error(ErrorCode::InvalidConfig, "unknown storage '" + s + "'");
}

template <class T>
constexpr bool is_float_v = std::is_floating_point_v<T>;

// Nearest multiple of step, ties away from zero. Ties are detected with a
// small tolerance so that decimal inputs such as -0.005 / 0.01 count as ties
// even when their binary quotient lands a hair off .5.
double round_to_step(double v, double step) {
    const double q = v / step;
    const double aq = std::fabs(q);
    const double fl = std::floor(aq);
    double r = std::fabs((aq - fl) - 0.5) < 1e-9 ? fl + 1.0 : std::round(aq);
    if (r == 0.0) return 0.0; // no negative zero
    if (q < 0) r = -r;
    const double inv = 1.0 / step;
    const double inv_round = std::round(inv);
    // Dividing by an integral reciprocal gives the double nearest to the
    // decimal multiple (12 / 100 == 0.12, while 12 * 0.01 != 0.12).
    if (inv_round >= 1.0 && std::fabs(inv - inv_round) < 1e-9 * inv_round) {
        return r / inv_round;
    }
    return r * step;
}

} // namespace

std::string_view to_string(ColumnKind kind) {
    switch (kind) {
    case ColumnKind::Continuous: return "continuous";
    case ColumnKind::Categorical: return "categorical";
    case ColumnKind::Identifier: return "identifier";
    case ColumnKind::Date: return "date";
    }
    return "continuous";
}

std::string_view to_string(Storage storage) {
    switch (storage) {
    case Storage::Int8: return "int8";
    case Storage::Int16: return "int16";
    case Storage::Float32: return "float32";
    }
    return "float32";
}

Schema schema_from_json(const Json& doc) {
    if (!doc.is_array()) throw Error(ErrorCode::InvalidConfig, "schema must be a JSON array");
    Schema schema;
    std::size_t identifiers = 0;
    for (const auto& entry : doc) {
        ColumnSchema col;
        try {
            col.name = entry.at("name").get<std::string>();
            col.kind = kind_from_string(entry.at("kind").get<std::string>());
            col.storage = entry.contains("storage") ? storage_from_string(entry["storage"].get<std::string>())
                                                    : Storage::Float32;
            if (entry.contains("valid_range") && !entry["valid_range"].is_null()) {
                const auto& r = entry["valid_range"];
                if (!r.is_array() || r.size() != 2) {
                    throw Error(ErrorCode::InvalidConfig, col.name + ": valid_range must be [low, high]");
                }
                col.valid_range = ValidRange{r[0].get<double>(), r[1].get<double>()};
                if (!(col.valid_range->low <= col.valid_range->high)) {
                    throw Error(ErrorCode::InvalidConfig, col.name + ": valid_range low > high");
                }
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::InvalidConfig, std::string("schema entry: ") + e.what());
        }
        if (col.kind == ColumnKind::Identifier) ++identifiers;
        schema.push_back(std::move(col));
    }
    if (identifiers != 1) {
        throw Error(ErrorCode::InvalidConfig, "schema needs exactly one identifier column, found " +
                                                  std::to_string(identifiers));
    }
    return schema;
}

Json schema_to_json(const Schema& schema) {
    Json doc = Json::array();
    for (const auto& col : schema) {
        Json e;
        e["name"] = col.name;
        e["kind"] = to_string(col.kind);
        e["storage"] = to_string(col.storage);
        if (col.valid_range) e["valid_range"] = {col.valid_range->low, col.valid_range->high};
        doc.push_back(std::move(e));
    }
    return doc;
}

Schema load_schema(const std::filesystem::path& path) { return schema_from_json(read_json(path)); }

// ============================================================================
// Column
// ============================================================================

std::size_t Column::size() const {
    return std::visit(
        [](const auto& v) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(v)>, std::monostate>) {
                return 0;
            } else {
                return v.size();
            }
        },
        data);
}

double Column::value(std::size_t row) const {
    return std::visit(
        [row](const auto& v) -> double {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, std::monostate>) {
                return kNaN;
            } else {
                using T = typename V::value_type;
                const T x = v[row];
                if constexpr (is_float_v<T>) {
                    return static_cast<double>(x);
                } else {
                    return x == static_cast<T>(kMissingCode) ? kNaN : static_cast<double>(x);
                }
            }
        },
        data);
}

bool Column::is_missing(std::size_t row) const { return std::isnan(value(row)); }

std::string_view Column::storage_name() const {
    switch (data.index()) {
    case 1: return "float64";
    case 2: return "float32";
    case 3: return "int32";
    case 4: return "int16";
    case 5: return "int8";
    default: return "none";
    }
}

// ============================================================================
// StatementTable
// ============================================================================

std::optional<std::size_t> StatementTable::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (schema[i].name == name) return i;
    }
    return std::nullopt;
}

std::size_t StatementTable::identifier_column() const {
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (schema[i].kind == ColumnKind::Identifier) return i;
    }
    throw Error(ErrorCode::InvalidConfig, "table has no identifier column");
}

std::vector<std::pair<std::size_t, std::size_t>> StatementTable::customer_ranges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t begin = 0;
    for (std::size_t r = 1; r <= rows(); ++r) {
        if (r == rows() || customer_ids[r] != customer_ids[begin]) {
            out.emplace_back(begin, r);
            begin = r;
        }
    }
    return out;
}

std::vector<std::string> StatementTable::customers() const {
    std::vector<std::string> out;
    for (const auto& [b, e] : customer_ranges()) out.push_back(customer_ids[b]);
    return out;
}

// ============================================================================
// Dates
// ============================================================================

std::optional<std::int32_t> parse_iso_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    auto num = [&](std::size_t off, std::size_t len, auto& out) {
        auto res = std::from_chars(text.data() + off, text.data() + off + len, out);
        return res.ec == std::errc() && res.ptr == text.data() + off + len;
    };
    if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return std::nullopt;
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return static_cast<std::int32_t>(std::chrono::sys_days{ymd}.time_since_epoch().count());
}

std::string format_iso_date(std::int32_t days) {
    const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

// ============================================================================
// parse_csv
// ============================================================================

StatementTable parse_csv_text(std::string_view text, const Schema& schema, const std::string& source) {
    const CsvFile csv = credit::parse_csv_text(text, source);
    if (csv.header.size() != schema.size()) {
        throw Error(ErrorCode::MissingColumn, source + ": header has " + std::to_string(csv.header.size()) +
                                                  " columns, schema has " + std::to_string(schema.size()));
    }
    for (std::size_t c = 0; c < schema.size(); ++c) {
        if (csv.header[c] != schema[c].name) {
            throw Error(ErrorCode::MissingColumn,
                        source + ": expected column '" + schema[c].name + "', found '" + csv.header[c] + "'");
        }
    }
    if (csv.rows.empty()) throw Error(ErrorCode::EmptyFile, source + " has no data rows");

    std::size_t id_col = schema.size();
    std::optional<std::size_t> date_col;
    for (std::size_t c = 0; c < schema.size(); ++c) {
        if (schema[c].kind == ColumnKind::Identifier) id_col = c;
        if (schema[c].kind == ColumnKind::Date && !date_col) date_col = c;
    }
    if (id_col == schema.size()) throw Error(ErrorCode::InvalidConfig, "schema has no identifier column");

    // Group rows by customer in first-appearance order.
    std::unordered_map<std::string, std::size_t> group_of;
    std::vector<std::vector<std::size_t>> groups;
    std::vector<std::int32_t> row_date(csv.rows.size(), 0);
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& rec = csv.rows[r];
        if (rec.size() != schema.size()) {
            throw Error(ErrorCode::InvalidData, source + ": record " + std::to_string(r + 1) + " has " +
                                                    std::to_string(rec.size()) + " fields");
        }
        const std::string& id = rec[id_col];
        if (id.empty()) throw Error(ErrorCode::InvalidData, source + ": record " + std::to_string(r + 1) + " has no customer id");
        if (date_col) {
            auto d = parse_iso_date(rec[*date_col]);
            if (!d) {
                throw Error(ErrorCode::InvalidData,
                            source + ": record " + std::to_string(r + 1) + " has bad date '" + rec[*date_col] + "'");
            }
            row_date[r] = *d;
        }
        auto [it, inserted] = group_of.try_emplace(id, groups.size());
        if (inserted) groups.emplace_back();
        groups[it->second].push_back(r);
    }

    std::vector<std::size_t> order;
    order.reserve(csv.rows.size());
    StatementTable table;
    table.schema = schema;
    for (auto& g : groups) {
        if (date_col) {
            std::stable_sort(g.begin(), g.end(), [&](std::size_t a, std::size_t b) { return row_date[a] < row_date[b]; });
            for (std::size_t i = 1; i < g.size(); ++i) {
                if (row_date[g[i]] == row_date[g[i - 1]]) {
                    throw Error(ErrorCode::DuplicateStatement, "customer " + csv.rows[g[i]][id_col] + " has two statements dated " +
                                                                   csv.rows[g[i]][*date_col]);
                }
            }
        }
        if (g.size() > static_cast<std::size_t>(kMaxStatements)) {
            throw Error(ErrorCode::InvalidData, "customer " + csv.rows[g.front()][id_col] + " has " +
                                                    std::to_string(g.size()) + " statements (max 13)");
        }
        for (std::size_t i = 0; i < g.size(); ++i) {
            order.push_back(g[i]);
            table.customer_ids.push_back(csv.rows[g[i]][id_col]);
            table.statement_index.push_back(static_cast<std::int32_t>(i + 1));
        }
    }

    table.columns.resize(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c) {
        switch (schema[c].kind) {
        case ColumnKind::Identifier:
            break;
        case ColumnKind::Date: {
            std::vector<std::int32_t> v;
            v.reserve(order.size());
            for (std::size_t r : order) v.push_back(row_date[r]);
            table.columns[c].data = std::move(v);
            break;
        }
        case ColumnKind::Continuous: {
            std::vector<double> v;
            v.reserve(order.size());
            for (std::size_t r : order) {
                double x = 0.0;
                v.push_back(parse_double(csv.rows[r][c], x) && !std::isnan(x) ? x : kNaN);
            }
            table.columns[c].data = std::move(v);
            break;
        }
        case ColumnKind::Categorical: {
            std::vector<std::int32_t> v;
            v.reserve(order.size());
            for (std::size_t r : order) {
                double x = 0.0;
                std::int32_t code = kMissingCode;
                if (parse_double(csv.rows[r][c], x) && x >= 0.0 && x == std::floor(x) &&
                    x <= static_cast<double>(std::numeric_limits<std::int32_t>::max())) {
                    code = static_cast<std::int32_t>(x);
                }
                v.push_back(code);
            }
            table.columns[c].data = std::move(v);
            break;
        }
        }
    }
    return table;
}

StatementTable parse_csv(const std::filesystem::path& path, const Schema& schema) {
    return parse_csv_text(read_file(path), schema, path.string());
}

// ============================================================================
// Cleaning
// ============================================================================

StatementTable denoise_round(const StatementTable& table, double precision, std::span<const std::string> columns) {
    if (!(precision > 0.0) || !std::isfinite(precision)) {
        throw Error(ErrorCode::NonPositivePrecision, "precision must be > 0, got " + format_shortest(precision));
    }
    StatementTable out = table;
    for (std::size_t c = 0; c < out.schema.size(); ++c) {
        if (out.schema[c].kind != ColumnKind::Continuous) continue;
        if (!columns.empty() && std::find(columns.begin(), columns.end(), out.schema[c].name) == columns.end()) continue;
        std::visit(
            [precision](auto& v) {
                using V = std::decay_t<decltype(v)>;
                if constexpr (!std::is_same_v<V, std::monostate>) {
                    using T = typename V::value_type;
                    if constexpr (is_float_v<T>) {
                        for (auto& x : v) {
                            if (!std::isnan(x)) x = static_cast<T>(round_to_step(static_cast<double>(x), precision));
                        }
                    }
                }
            },
            out.columns[c].data);
    }
    return out;
}

StatementTable compact_types(const StatementTable& table, const Schema& schema) {
    StatementTable out = table;
    for (std::size_t c = 0; c < out.schema.size(); ++c) {
        auto& col = out.schema[c];
        Storage hint = col.storage;
        for (const auto& s : schema) {
            if (s.name == col.name) hint = s.storage;
        }
        if (col.kind == ColumnKind::Continuous) {
            std::vector<float> v(out.rows());
            for (std::size_t r = 0; r < v.size(); ++r) v[r] = static_cast<float>(table.columns[c].value(r));
            out.columns[c].data = std::move(v);
            col.storage = Storage::Float32;
        } else if (col.kind == ColumnKind::Categorical) {
            double max_code = -1.0;
            for (std::size_t r = 0; r < out.rows(); ++r) {
                const double x = table.columns[c].value(r);
                if (!std::isnan(x)) max_code = std::max(max_code, x);
            }
            if (max_code > std::numeric_limits<std::int16_t>::max()) {
                throw Error(ErrorCode::CodeOverflow,
                            col.name + ": code " + format_shortest(max_code) + " exceeds the 16-bit range");
            }
            const bool needs16 = max_code > std::numeric_limits<std::int8_t>::max();
            const Storage chosen = (needs16 || hint == Storage::Int16) ? Storage::Int16 : Storage::Int8;
            auto fill = [&](auto tag) {
                using T = decltype(tag);
                std::vector<T> v(out.rows());
                for (std::size_t r = 0; r < v.size(); ++r) {
                    const double x = table.columns[c].value(r);
                    v[r] = std::isnan(x) ? static_cast<T>(kMissingCode) : static_cast<T>(x);
                }
                out.columns[c].data = std::move(v);
            };
            if (chosen == Storage::Int16) {
                fill(std::int16_t{});
            } else {
                fill(std::int8_t{});
            }
            col.storage = chosen;
        }
    }
    return out;
}

MaskResult mask_outliers(const StatementTable& table, const Schema& schema) {
    MaskResult result{table, std::vector<std::size_t>(table.schema.size(), 0)};
    for (std::size_t c = 0; c < result.table.schema.size(); ++c) {
        if (result.table.schema[c].kind != ColumnKind::Continuous) continue;
        std::optional<ValidRange> range;
        for (const auto& s : schema) {
            if (s.name == result.table.schema[c].name) range = s.valid_range;
        }
        if (!range) continue;
        result.table.schema[c].valid_range = range;
        std::size_t& masked = result.masked[c];
        std::visit(
            [&](auto& v) {
                using V = std::decay_t<decltype(v)>;
                if constexpr (!std::is_same_v<V, std::monostate>) {
                    using T = typename V::value_type;
                    if constexpr (is_float_v<T>) {
                        for (auto& x : v) {
                            if (std::isnan(x)) continue;
                            const double d = static_cast<double>(x);
                            if (d < range->low || d > range->high) {
                                x = std::numeric_limits<T>::quiet_NaN();
                                ++masked;
                            }
                        }
                    }
                }
            },
            result.table.columns[c].data);
    }
    return result;
}

// ============================================================================
// Labels
// ============================================================================

StatementTable select_statement_rows(const StatementTable& table, std::span<const std::size_t> rows) {
    StatementTable out;
    out.schema = table.schema;
    out.customer_ids.reserve(rows.size());
    out.statement_index.reserve(rows.size());
    for (std::size_t r : rows) {
        out.customer_ids.push_back(table.customer_ids[r]);
        out.statement_index.push_back(table.statement_index[r]);
    }
    out.columns.resize(table.columns.size());
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        out.columns[c].data = std::visit(
            [&](const auto& v) -> ColumnData {
                using V = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<V, std::monostate>) {
                    return std::monostate{};
                } else {
                    V picked;
                    picked.reserve(rows.size());
                    for (std::size_t r : rows) picked.push_back(v[r]);
                    return picked;
                }
            },
            table.columns[c].data);
    }
    return out;
}

LabeledTable select_customers(const LabeledTable& labeled, std::span<const std::size_t> positions) {
    const auto ranges = labeled.table.customer_ranges();
    std::vector<std::size_t> rows;
    LabeledTable out;
    for (std::size_t p : positions) {
        if (p >= ranges.size()) throw Error(ErrorCode::InvalidData, "customer position out of range");
        for (std::size_t r = ranges[p].first; r < ranges[p].second; ++r) rows.push_back(r);
        out.customers.push_back(labeled.customers[p]);
        out.target.push_back(labeled.target[p]);
    }
    out.table = select_statement_rows(labeled.table, rows);
    return out;
}

LabeledTable join_labels(const StatementTable& table, const LabelMap& labels) {
    LabeledTable out;
    out.customers = table.customers();
    out.target.reserve(out.customers.size());
    for (const auto& id : out.customers) {
        auto it = labels.find(id);
        if (it == labels.end()) throw Error(ErrorCode::MissingLabel, "no label for customer " + id);
        out.target.push_back(it->second);
    }
    out.unmatched_labels = labels.size() - out.customers.size();
    out.table = table;
    return out;
}

LabelMap labels_from_csv_text(std::string_view text, const std::string& source) {
    const CsvFile csv = credit::parse_csv_text(text, source);
    if (csv.header.size() < 2) throw Error(ErrorCode::MissingColumn, source + ": label file needs (customer_id, target)");
    LabelMap labels;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& rec = csv.rows[r];
        std::int64_t y = -1;
        if (rec.size() < 2 || !parse_int64(rec[1], y) || (y != 0 && y != 1)) {
            throw Error(ErrorCode::InvalidData, source + ": record " + std::to_string(r + 1) + " has no binary label");
        }
        if (!labels.emplace(rec[0], static_cast<int>(y)).second) {
            throw Error(ErrorCode::InvalidData, source + ": duplicate label for customer " + rec[0]);
        }
    }
    if (labels.empty()) throw Error(ErrorCode::EmptyFile, source + " has no labels");
    return labels;
}

LabelMap load_labels(const std::filesystem::path& path) {
    return labels_from_csv_text(read_file(path), path.string());
}

std::string table_to_csv(const StatementTable& table) {
    std::string out;
    for (std::size_t c = 0; c < table.schema.size(); ++c) {
        if (c) out += ',';
        out += table.schema[c].name;
    }
    out += '\n';
    char buf[64];
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < table.schema.size(); ++c) {
            if (c) out += ',';
            const auto& col = table.columns[c];
            switch (table.schema[c].kind) {
            case ColumnKind::Identifier:
                out += table.customer_ids[r];
                break;
            case ColumnKind::Date:
                out += format_iso_date(static_cast<std::int32_t>(col.value(r)));
                break;
            default: {
                if (col.is_missing(r)) break;
                if (const auto* f = std::get_if<std::vector<float>>(&col.data)) {
                    auto res = std::to_chars(buf, buf + sizeof(buf), (*f)[r]);
                    out.append(buf, res.ptr);
                } else {
                    out += format_shortest(col.value(r));
                }
            }
            }
        }
        out += '\n';
    }
    return out;
}

} // namespace credit
