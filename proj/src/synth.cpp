#include "credit/synth.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "credit/error.hpp"
#include "credit/gbdt.hpp"

namespace credit {

namespace {

std::int32_t statement_day(int month_index, int day) {
    using namespace std::chrono;
    const year_month first{year{2017}, month{4}};
    const year_month ym = first + months{month_index};
    return static_cast<std::int32_t>(sys_days{ym / std::chrono::day{static_cast<unsigned>(day)}}.time_since_epoch().count());
}

double round_cents(double v) {
    const double r = std::nearbyint(v * 100.0) / 100.0;
    return r == 0.0 ? 0.0 : r;
}

} // namespace

void SynthConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
    if (n_customers < 10) fail("n_customers must be >= 10");
    if (!(frac_full >= 0.0 && frac_full <= 1.0)) fail("frac_full must be in [0, 1]");
    if (!(noise_amplitude >= 0.0)) fail("noise_amplitude must be >= 0");
    if (!(neg_keep_rate > 0.0 && neg_keep_rate <= 1.0)) fail("neg_keep_rate must be in (0, 1]");
    if (!(missing_rate >= 0.0 && missing_rate < 1.0)) fail("missing_rate must be in [0, 1)");
    if (!(statement_noise >= 0.0)) fail("statement_noise must be >= 0");
    if (signal_features.empty()) throw Error(ErrorCode::NoSignal, "at least one signal feature is required");
    for (std::size_t f : signal_features) {
        if (f >= n_continuous) fail("signal feature c_" + std::to_string(f) + " is not a declared continuous column");
    }
}

SynthConfig synth_config_from_json(const Json& doc) {
    SynthConfig c;
    try {
        c.n_customers = doc.value("n_customers", c.n_customers);
        c.frac_full = doc.value("frac_full", c.frac_full);
        c.n_continuous = doc.value("n_continuous", c.n_continuous);
        c.n_categorical = doc.value("n_categorical", c.n_categorical);
        if (doc.contains("signal_features")) c.signal_features = doc["signal_features"].get<std::vector<std::size_t>>();
        c.noise_amplitude = doc.value("noise_amplitude", c.noise_amplitude);
        c.neg_keep_rate = doc.value("neg_keep_rate", c.neg_keep_rate);
        c.seed = doc.value("seed", c.seed);
        c.signal_strength = doc.value("signal_strength", c.signal_strength);
        c.intercept = doc.value("intercept", c.intercept);
        c.statement_noise = doc.value("statement_noise", c.statement_noise);
        c.missing_rate = doc.value("missing_rate", c.missing_rate);
        c.separable = doc.value("separable", c.separable);
        c.separable_threshold = doc.value("separable_threshold", c.separable_threshold);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("synth config: ") + e.what());
    }
    c.validate();
    return c;
}

Json to_json(const SynthConfig& c) {
    Json doc;
    doc["n_customers"] = c.n_customers;
    doc["frac_full"] = c.frac_full;
    doc["n_continuous"] = c.n_continuous;
    doc["n_categorical"] = c.n_categorical;
    doc["signal_features"] = c.signal_features;
    doc["noise_amplitude"] = c.noise_amplitude;
    doc["neg_keep_rate"] = c.neg_keep_rate;
    doc["seed"] = c.seed;
    doc["signal_strength"] = c.signal_strength;
    doc["intercept"] = c.intercept;
    doc["statement_noise"] = c.statement_noise;
    doc["missing_rate"] = c.missing_rate;
    doc["separable"] = c.separable;
    doc["separable_threshold"] = c.separable_threshold;
    return doc;
}

Schema synth_schema(const SynthConfig& config) {
    Schema schema;
    schema.push_back({"customer_id", ColumnKind::Identifier, Storage::Float32, std::nullopt});
    schema.push_back({"statement_date", ColumnKind::Date, Storage::Float32, std::nullopt});
    for (std::size_t i = 0; i < config.n_continuous; ++i) {
        schema.push_back({"c_" + std::to_string(i), ColumnKind::Continuous, Storage::Float32, std::nullopt});
    }
    for (std::size_t j = 0; j < config.n_categorical; ++j) {
        schema.push_back({"k_" + std::to_string(j), ColumnKind::Categorical, Storage::Int8, std::nullopt});
    }
    return schema;
}

SynthData generate(const SynthConfig& config) {
    config.validate();
    Rng rng(config.seed);
    const std::size_t n = config.n_customers;
    const std::size_t n_cont = config.n_continuous;

    // Draw customers until n survive negative subsampling.
    std::vector<std::vector<double>> levels;
    std::vector<int> labels;
    SynthData data;
    while (labels.size() < n) {
        std::vector<double> mu(n_cont);
        for (double& v : mu) v = rng.normal();
        double s = 0.0;
        for (std::size_t f : config.signal_features) s += mu[f];
        s /= static_cast<double>(config.signal_features.size());
        int y = 0;
        if (config.separable) {
            y = s > config.separable_threshold ? 1 : 0;
        } else {
            y = rng.unit() < sigmoid(config.intercept + config.signal_strength * s) ? 1 : 0;
        }
        ++data.generated;
        data.positives_generated += static_cast<std::size_t>(y);
        if (y == 0 && !(rng.unit() < config.neg_keep_rate)) continue;
        levels.push_back(std::move(mu));
        labels.push_back(y);
    }

    // Exactly floor(frac_full * n) customers get the full 13 statements.
    const auto n_full = static_cast<std::size_t>(std::floor(config.frac_full * static_cast<double>(n) + 1e-9));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<int> counts(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        counts[order[i]] = i < n_full ? kMaxStatements : 1 + static_cast<int>(rng.index(kMaxStatements - 1));
    }

    StatementTable& table = data.table;
    table.schema = synth_schema(config);
    std::vector<std::int32_t> dates;
    std::vector<std::vector<double>> cont(n_cont);
    std::vector<std::vector<std::int32_t>> cats(config.n_categorical);
    char id[32];
    for (std::size_t c = 0; c < n; ++c) {
        std::snprintf(id, sizeof(id), "C%07zu", c);
        data.customers.emplace_back(id);
        const int day = 1 + static_cast<int>(rng.index(28));
        std::vector<std::int32_t> preferred(config.n_categorical);
        for (std::size_t j = 0; j < config.n_categorical; ++j) {
            preferred[j] = static_cast<std::int32_t>(rng.index(4 + 3 * j));
        }
        for (int t = 0; t < counts[c]; ++t) {
            table.customer_ids.emplace_back(id);
            table.statement_index.push_back(t + 1);
            dates.push_back(statement_day(kMaxStatements - counts[c] + t, day));
            for (std::size_t f = 0; f < n_cont; ++f) {
                const double base = round_cents(levels[c][f] + config.statement_noise * rng.normal());
                const double noise = config.noise_amplitude * (2.0 * rng.unit() - 1.0);
                const bool missing = rng.unit() < config.missing_rate;
                cont[f].push_back(missing ? kNaN : base + noise);
            }
            for (std::size_t j = 0; j < config.n_categorical; ++j) {
                const bool missing = rng.unit() < config.missing_rate;
                const bool stay = rng.unit() < 0.8;
                const auto other = static_cast<std::int32_t>(rng.index(4 + 3 * j));
                cats[j].push_back(missing ? kMissingCode : (stay ? preferred[j] : other));
            }
        }
    }

    table.columns.resize(table.schema.size());
    table.columns[1].data = std::move(dates);
    for (std::size_t f = 0; f < n_cont; ++f) table.columns[2 + f].data = std::move(cont[f]);
    for (std::size_t j = 0; j < config.n_categorical; ++j) table.columns[2 + n_cont + j].data = std::move(cats[j]);
    data.labels = std::move(labels);
    return data;
}

std::string labels_to_csv(const std::vector<std::string>& customers, const std::vector<int>& labels) {
    std::string out = "customer_id,target\n";
    for (std::size_t i = 0; i < customers.size(); ++i) {
        out += customers[i];
        out += ',';
        out += std::to_string(labels[i]);
        out += '\n';
    }
    return out;
}

} // namespace credit
