#include "credit/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <set>
#include <unordered_set>

#include "credit/error.hpp"

namespace credit {

static_assert(std::endian::native == std::endian::little, "CSFM writer assumes a little-endian host");

namespace {

ContinuousStat continuous_stat_from(const std::string& s) {
    if (s == "mean") return ContinuousStat::Mean;
    if (s == "std") return ContinuousStat::Std;
    if (s == "min") return ContinuousStat::Min;
    if (s == "max") return ContinuousStat::Max;
    if (s == "last") return ContinuousStat::Last;
    if (s == "median") return ContinuousStat::Median;
    throw Error(ErrorCode::InvalidConfig, "unknown continuous stat '" + s + "'");
}

CategoricalStat categorical_stat_from(const std::string& s) {
    if (s == "count") return CategoricalStat::Count;
    if (s == "last") return CategoricalStat::Last;
    if (s == "nunique") return CategoricalStat::Nunique;
    throw Error(ErrorCode::InvalidConfig, "unknown categorical stat '" + s + "'");
}

Encoding encoding_from(const std::string& s) {
    if (s == "none") return Encoding::None;
    if (s == "ordinal") return Encoding::Ordinal;
    if (s == "one-hot") return Encoding::OneHot;
    throw Error(ErrorCode::InvalidConfig, "unknown encoding '" + s + "'");
}

float to_f32(double v) { return std::isnan(v) ? std::numeric_limits<float>::quiet_NaN() : static_cast<float>(v); }

struct NamedColumn {
    std::string name;
    std::vector<float> data;
};

std::vector<NamedColumn> encoded_columns(const CategoricalLast& input, Encoding mode, const CategoricalVocabulary* vocab) {
    std::vector<NamedColumn> out;
    if (mode == Encoding::Ordinal) {
        NamedColumn col{input.raw + "_code", {}};
        col.data.reserve(input.last.size());
        for (double v : input.last) col.data.push_back(to_f32(v));
        out.push_back(std::move(col));
    } else if (mode == Encoding::OneHot) {
        if (vocab == nullptr) {
            throw Error(ErrorCode::VocabularyMissing, "one-hot encoding of '" + input.raw + "' needs a training vocabulary");
        }
        auto it = vocab->codes.find(input.raw);
        if (it == vocab->codes.end()) {
            throw Error(ErrorCode::VocabularyMissing, "vocabulary has no entry for '" + input.raw + "'");
        }
        for (std::int32_t code : it->second) {
            NamedColumn col{input.raw + "_is_" + std::to_string(code), {}};
            col.data.reserve(input.last.size());
            for (double v : input.last) col.data.push_back(!std::isnan(v) && static_cast<std::int32_t>(v) == code ? 1.0f : 0.0f);
            out.push_back(std::move(col));
        }
    }
    return out;
}

void put_u32(std::string& out, std::uint32_t v) { out.append(reinterpret_cast<const char*>(&v), 4); }
void put_u64(std::string& out, std::uint64_t v) { out.append(reinterpret_cast<const char*>(&v), 8); }

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <class T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string get_string() {
        const auto len = get<std::uint32_t>();
        need(len);
        std::string s(bytes_.substr(pos_, len));
        pos_ += len;
        return s;
    }
    std::string_view take(std::size_t n) {
        need(n);
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw Error(ErrorCode::InvalidData, "truncated CSFM container");
    }
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

} // namespace

std::string_view to_string(ContinuousStat s) {
    switch (s) {
    case ContinuousStat::Mean: return "mean";
    case ContinuousStat::Std: return "std";
    case ContinuousStat::Min: return "min";
    case ContinuousStat::Max: return "max";
    case ContinuousStat::Last: return "last";
    case ContinuousStat::Median: return "median";
    }
    return "mean";
}

std::string_view to_string(CategoricalStat s) {
    switch (s) {
    case CategoricalStat::Count: return "count";
    case CategoricalStat::Last: return "last";
    case CategoricalStat::Nunique: return "nunique";
    }
    return "count";
}

std::string_view to_string(Encoding e) {
    switch (e) {
    case Encoding::None: return "none";
    case Encoding::Ordinal: return "ordinal";
    case Encoding::OneHot: return "one-hot";
    }
    return "none";
}

// ============================================================================
// AggregationSpec
// ============================================================================

void AggregationSpec::validate() const {
    if (continuous_stats.empty() && categorical_stats.empty() && !lag_enabled && encoding == Encoding::None) {
        throw Error(ErrorCode::EmptySpec, "aggregation spec selects no statistics");
    }
    if (recent_window && *recent_window < 1) {
        throw Error(ErrorCode::InvalidConfig, "recent_window must be >= 1");
    }
}

AggregationSpec AggregationSpec::full() {
    AggregationSpec spec;
    spec.continuous_stats = {ContinuousStat::Mean, ContinuousStat::Std,  ContinuousStat::Min,
                             ContinuousStat::Max,  ContinuousStat::Last, ContinuousStat::Median};
    spec.categorical_stats = {CategoricalStat::Count, CategoricalStat::Last, CategoricalStat::Nunique};
    spec.lag_enabled = true;
    return spec;
}

AggregationSpec aggregation_spec_from_json(const Json& doc) {
    AggregationSpec spec;
    try {
        for (const auto& s : doc.value("continuous_stats", Json::array())) {
            spec.continuous_stats.push_back(continuous_stat_from(s.get<std::string>()));
        }
        for (const auto& s : doc.value("categorical_stats", Json::array())) {
            spec.categorical_stats.push_back(categorical_stat_from(s.get<std::string>()));
        }
        spec.lag_enabled = doc.value("lag", false);
        if (doc.contains("recent_window") && !doc["recent_window"].is_null()) {
            spec.recent_window = doc["recent_window"].get<int>();
        }
        spec.encoding = encoding_from(doc.value("encode", std::string("none")));
        const std::string fill = doc.value("fill_missing", std::string("none"));
        if (fill == "zero") {
            spec.fill = MissingFill::Zero;
        } else if (fill != "none") {
            throw Error(ErrorCode::InvalidConfig, "unknown fill_missing '" + fill + "'");
        }
        for (const auto& c : doc.value("columns", Json::array())) spec.include_columns.push_back(c.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("aggregation spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

Json to_json(const AggregationSpec& spec) {
    Json doc;
    doc["continuous_stats"] = Json::array();
    for (auto s : spec.continuous_stats) doc["continuous_stats"].push_back(to_string(s));
    doc["categorical_stats"] = Json::array();
    for (auto s : spec.categorical_stats) doc["categorical_stats"].push_back(to_string(s));
    doc["lag"] = spec.lag_enabled;
    doc["recent_window"] = spec.recent_window ? Json(*spec.recent_window) : Json(nullptr);
    doc["encode"] = to_string(spec.encoding);
    doc["fill_missing"] = spec.fill == MissingFill::Zero ? "zero" : "none";
    doc["columns"] = spec.include_columns;
    return doc;
}

// ============================================================================
// FeatureMatrix
// ============================================================================

std::optional<std::size_t> FeatureMatrix::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < column_names.size(); ++i) {
        if (column_names[i] == name) return i;
    }
    return std::nullopt;
}

std::vector<float> FeatureMatrix::column(std::size_t col) const {
    std::vector<float> out(rows());
    for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, col);
    return out;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> picked) const {
    FeatureMatrix out;
    out.column_names = column_names;
    out.customer_ids.reserve(picked.size());
    out.values.reserve(picked.size() * cols());
    for (std::size_t r : picked) {
        out.customer_ids.push_back(customer_ids.at(r));
        out.values.insert(out.values.end(), values.begin() + static_cast<std::ptrdiff_t>(r * cols()),
                          values.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols()));
    }
    return out;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::string> names) const {
    std::vector<std::size_t> idx;
    for (const auto& n : names) {
        auto c = column_index(n);
        if (!c) throw Error(ErrorCode::MissingFeatureColumn, "matrix has no column '" + n + "'");
        idx.push_back(*c);
    }
    FeatureMatrix out;
    out.customer_ids = customer_ids;
    out.column_names.assign(names.begin(), names.end());
    out.values.reserve(rows() * idx.size());
    for (std::size_t r = 0; r < rows(); ++r) {
        for (std::size_t c : idx) out.values.push_back(at(r, c));
    }
    return out;
}

void FeatureMatrix::add_column(const std::string& name, std::span<const float> data) {
    if (data.size() != rows()) {
        throw Error(ErrorCode::LengthMismatch, "column '" + name + "' has " + std::to_string(data.size()) +
                                                   " values for " + std::to_string(rows()) + " rows");
    }
    if (column_index(name)) throw Error(ErrorCode::InvalidData, "duplicate column '" + name + "'");
    const std::size_t old_cols = cols();
    std::vector<float> grown;
    grown.reserve(rows() * (old_cols + 1));
    for (std::size_t r = 0; r < rows(); ++r) {
        grown.insert(grown.end(), values.begin() + static_cast<std::ptrdiff_t>(r * old_cols),
                     values.begin() + static_cast<std::ptrdiff_t>((r + 1) * old_cols));
        grown.push_back(data[r]);
    }
    values = std::move(grown);
    column_names.push_back(name);
}

// ============================================================================
// Aggregations
// ============================================================================

double ContinuousAggregates::get(ContinuousStat s) const {
    switch (s) {
    case ContinuousStat::Mean: return mean;
    case ContinuousStat::Std: return std;
    case ContinuousStat::Min: return min;
    case ContinuousStat::Max: return max;
    case ContinuousStat::Last: return last;
    case ContinuousStat::Median: return median;
    }
    return kNaN;
}

ContinuousAggregates aggregate_continuous(std::span<const double> series) {
    std::vector<double> v;
    v.reserve(series.size());
    for (double x : series) {
        if (!std::isnan(x)) v.push_back(x);
    }
    ContinuousAggregates a;
    if (v.empty()) return a;
    const auto n = static_cast<double>(v.size());
    double sum = 0.0;
    for (double x : v) sum += x;
    a.last = v.back();
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    a.min = sorted.front();
    a.max = sorted.back();
    const std::size_t mid = sorted.size() / 2;
    a.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    // Rounding in the mean can push it a hair past an extreme when all
    // values are equal.
    a.mean = std::clamp(sum / n, a.min, a.max);
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - a.mean) * (x - a.mean);
        a.std = std::sqrt(ss / (n - 1.0));
    }
    return a;
}

double CategoricalAggregates::get(CategoricalStat s) const {
    switch (s) {
    case CategoricalStat::Count: return count;
    case CategoricalStat::Last: return last;
    case CategoricalStat::Nunique: return nunique;
    }
    return kNaN;
}

CategoricalAggregates aggregate_categorical(std::span<const double> series) {
    CategoricalAggregates a;
    std::set<double> seen;
    for (double x : series) {
        if (std::isnan(x)) continue;
        a.count += 1.0;
        a.last = x;
        seen.insert(x);
    }
    a.nunique = static_cast<double>(seen.size());
    return a;
}

double lag_value(double last, double mean) {
    if (std::isnan(last) || std::isnan(mean)) return kNaN;
    return last - mean;
}

StatementTable select_recent_window(const StatementTable& table, int k) {
    if (k < 1) throw Error(ErrorCode::InvalidConfig, "recent window must be >= 1");
    std::vector<std::size_t> keep;
    std::vector<std::int32_t> new_index;
    for (const auto& [b, e] : table.customer_ranges()) {
        const std::size_t n = e - b;
        const std::size_t start = n > static_cast<std::size_t>(k) ? e - static_cast<std::size_t>(k) : b;
        for (std::size_t r = start; r < e; ++r) {
            keep.push_back(r);
            new_index.push_back(static_cast<std::int32_t>(r - start + 1));
        }
    }
    StatementTable out = select_statement_rows(table, keep);
    out.statement_index = std::move(new_index);
    return out;
}

// ============================================================================
// Encoding
// ============================================================================

Json to_json(const CategoricalVocabulary& vocab) {
    Json doc = Json::object();
    for (const auto& [raw, codes] : vocab.codes) doc[raw] = codes;
    return doc;
}

CategoricalVocabulary vocabulary_from_json(const Json& doc) {
    CategoricalVocabulary vocab;
    try {
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            vocab.codes[it.key()] = it.value().get<std::vector<std::int32_t>>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("vocabulary: ") + e.what());
    }
    return vocab;
}

CategoricalVocabulary fit_vocabulary(std::span<const CategoricalLast> inputs) {
    CategoricalVocabulary vocab;
    for (const auto& in : inputs) {
        std::set<std::int32_t> codes;
        for (double v : in.last) {
            if (!std::isnan(v)) codes.insert(static_cast<std::int32_t>(v));
        }
        vocab.codes[in.raw].assign(codes.begin(), codes.end());
    }
    return vocab;
}

void encode_categorical(FeatureMatrix& matrix, std::span<const CategoricalLast> inputs, Encoding mode,
                        const CategoricalVocabulary* vocabulary) {
    for (const auto& in : inputs) {
        for (auto& col : encoded_columns(in, mode, vocabulary)) matrix.add_column(col.name, col.data);
    }
}

// ============================================================================
// build_matrix
// ============================================================================

BuiltMatrix build_matrix(const StatementTable& source, const AggregationSpec& spec, const BuildOptions& options) {
    spec.validate();
    const StatementTable table = spec.recent_window ? select_recent_window(source, *spec.recent_window) : source;

    for (const auto& name : spec.include_columns) {
        auto c = table.column_index(name);
        if (!c || (table.schema[*c].kind != ColumnKind::Continuous && table.schema[*c].kind != ColumnKind::Categorical)) {
            throw Error(ErrorCode::MissingColumn, "feature column '" + name + "' is not a continuous or categorical column");
        }
    }
    const auto wanted = [&](const std::string& name) {
        return spec.include_columns.empty() ||
               std::find(spec.include_columns.begin(), spec.include_columns.end(), name) != spec.include_columns.end();
    };

    const auto ranges = table.customer_ranges();
    const std::size_t n_rows = ranges.size();
    if (n_rows == 0) throw Error(ErrorCode::EmptyMatrix, "table has no customers");

    // Categorical `last` codes first, so a vocabulary exists before emission.
    std::vector<CategoricalLast> cat_last;
    std::vector<std::vector<CategoricalAggregates>> cat_aggs;
    for (std::size_t c = 0; c < table.schema.size(); ++c) {
        if (table.schema[c].kind != ColumnKind::Categorical || !wanted(table.schema[c].name)) continue;
        CategoricalLast last{table.schema[c].name, {}};
        std::vector<CategoricalAggregates> aggs;
        std::vector<double> series;
        for (const auto& [b, e] : ranges) {
            series.clear();
            for (std::size_t r = b; r < e; ++r) series.push_back(table.columns[c].value(r));
            aggs.push_back(aggregate_categorical(series));
            last.last.push_back(aggs.back().last);
        }
        cat_last.push_back(std::move(last));
        cat_aggs.push_back(std::move(aggs));
    }

    BuiltMatrix built;
    if (options.vocabulary) {
        built.vocabulary = *options.vocabulary;
    } else if (options.fit_vocabulary) {
        built.vocabulary = fit_vocabulary(cat_last);
    }
    const CategoricalVocabulary* vocab =
        (options.vocabulary || options.fit_vocabulary) ? &built.vocabulary : nullptr;

    std::vector<NamedColumn> columns;
    std::size_t cat_pos = 0;
    for (std::size_t c = 0; c < table.schema.size(); ++c) {
        const auto& sc = table.schema[c];
        if (!wanted(sc.name)) continue;
        if (sc.kind == ColumnKind::Continuous) {
            std::vector<ContinuousAggregates> aggs;
            aggs.reserve(n_rows);
            std::vector<double> series;
            for (const auto& [b, e] : ranges) {
                series.clear();
                for (std::size_t r = b; r < e; ++r) series.push_back(table.columns[c].value(r));
                aggs.push_back(aggregate_continuous(series));
            }
            for (auto stat : spec.continuous_stats) {
                NamedColumn col{sc.name + "_" + std::string(to_string(stat)), {}};
                col.data.reserve(n_rows);
                for (const auto& a : aggs) col.data.push_back(to_f32(a.get(stat)));
                columns.push_back(std::move(col));
            }
            if (spec.lag_enabled) {
                NamedColumn col{sc.name + "_lag", {}};
                col.data.reserve(n_rows);
                // From the stored float values, so lag == last - mean holds
                // on the matrix itself.
                for (const auto& a : aggs) {
                    col.data.push_back(to_f32(lag_value(static_cast<double>(to_f32(a.last)),
                                                        static_cast<double>(to_f32(a.mean)))));
                }
                columns.push_back(std::move(col));
            }
        } else if (sc.kind == ColumnKind::Categorical) {
            const auto& aggs = cat_aggs[cat_pos];
            for (auto stat : spec.categorical_stats) {
                NamedColumn col{sc.name + "_" + std::string(to_string(stat)), {}};
                col.data.reserve(n_rows);
                for (const auto& a : aggs) col.data.push_back(to_f32(a.get(stat)));
                columns.push_back(std::move(col));
            }
            for (auto& col : encoded_columns(cat_last[cat_pos], spec.encoding, vocab)) columns.push_back(std::move(col));
            ++cat_pos;
        }
    }

    FeatureMatrix& m = built.matrix;
    for (const auto& [b, e] : ranges) m.customer_ids.push_back(table.customer_ids[b]);
    std::unordered_set<std::string> names;
    for (const auto& col : columns) {
        if (!names.insert(col.name).second) throw Error(ErrorCode::InvalidData, "duplicate feature column '" + col.name + "'");
        m.column_names.push_back(col.name);
    }
    m.values.resize(n_rows * columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        for (std::size_t r = 0; r < n_rows; ++r) {
            float v = columns[j].data[r];
            if (spec.fill == MissingFill::Zero && std::isnan(v)) v = 0.0f;
            m.values[r * columns.size() + j] = v;
        }
    }
    return built;
}

BuiltMatrix build_matrix(const LabeledTable& labeled, const AggregationSpec& spec, const BuildOptions& options) {
    BuiltMatrix built = build_matrix(labeled.table, spec, options);
    // Window selection never drops a customer, so row order matches.
    built.labels = labeled.target;
    if (built.labels.size() != built.matrix.rows()) {
        throw Error(ErrorCode::LengthMismatch, "label count does not match customer count");
    }
    return built;
}

// ============================================================================
// CSFM container
// ============================================================================

std::string serialize_matrix(const FeatureMatrix& matrix) {
    std::string out = "CSFM";
    put_u32(out, 1);
    put_u64(out, matrix.rows());
    put_u64(out, matrix.cols());
    for (const auto& name : matrix.column_names) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out += name;
    }
    for (const auto& id : matrix.customer_ids) {
        put_u32(out, static_cast<std::uint32_t>(id.size()));
        out += id;
    }
    out.reserve(out.size() + matrix.values.size() * 4);
    for (float v : matrix.values) {
        std::uint32_t bits = std::isnan(v) ? 0x7FC00000u : std::bit_cast<std::uint32_t>(v);
        put_u32(out, bits);
    }
    return out;
}

FeatureMatrix deserialize_matrix(std::string_view bytes) {
    Reader in(bytes);
    if (in.take(4) != "CSFM") throw Error(ErrorCode::InvalidData, "not a CSFM container");
    const auto version = in.get<std::uint32_t>();
    if (version != 1) throw Error(ErrorCode::InvalidData, "unsupported CSFM version " + std::to_string(version));
    const auto rows = in.get<std::uint64_t>();
    const auto cols = in.get<std::uint64_t>();
    FeatureMatrix m;
    for (std::uint64_t c = 0; c < cols; ++c) m.column_names.push_back(in.get_string());
    for (std::uint64_t r = 0; r < rows; ++r) m.customer_ids.push_back(in.get_string());
    const auto payload = in.take(rows * cols * 4);
    m.values.resize(rows * cols);
    std::memcpy(m.values.data(), payload.data(), payload.size());
    if (!in.done()) throw Error(ErrorCode::InvalidData, "trailing bytes after CSFM payload");
    return m;
}

void save_matrix(const std::filesystem::path& path, const FeatureMatrix& matrix) {
    write_file(path, serialize_matrix(matrix));
}

FeatureMatrix load_matrix(const std::filesystem::path& path) { return deserialize_matrix(read_file(path)); }

} // namespace credit
