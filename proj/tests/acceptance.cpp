// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "credit/blend.hpp"
#include "credit/cv_stack.hpp"
#include "credit/error.hpp"
#include "credit/features.hpp"
#include "credit/gbdt.hpp"
#include "credit/ingest.hpp"
#include "credit/metric.hpp"
#include "credit/pipeline.hpp"
#include "credit/report.hpp"
#include "credit/synth.hpp"
#include "oracles.hpp"

using namespace credit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

// ---------------------------------------------------------------------------
// Shared fixtures
// ---------------------------------------------------------------------------

struct Instance {
    std::vector<int> y;
    std::vector<double> p;
};

// Random size, class balance and tie clusters.
Instance random_instance(Rng& rng, std::size_t max_n) {
    Instance inst;
    const std::size_t n = 2 + rng.index(max_n - 1);
    const double pos_rate = 0.02 + 0.96 * rng.unit();
    const bool clustered = rng.unit() < 0.5;
    const std::size_t levels = 1 + rng.index(n);
    for (std::size_t i = 0; i < n; ++i) {
        inst.y.push_back(rng.unit() < pos_rate ? 1 : 0);
        inst.p.push_back(clustered ? static_cast<double>(rng.index(levels) + 1) / static_cast<double>(levels + 1)
                                   : rng.unit());
    }
    // Both classes present, at random positions.
    const std::size_t pos = rng.index(n);
    const std::size_t neg = (pos + 1 + rng.index(n - 1)) % n;
    inst.y[pos] = 1;
    inst.y[neg] = 0;
    return inst;
}

struct Dataset {
    FeatureMatrix matrix;
    std::vector<int> labels;
};

Dataset synthetic(const SynthConfig& config, const AggregationSpec& spec = AggregationSpec::full()) {
    const auto data = generate(config);
    LabelMap labels;
    for (std::size_t i = 0; i < data.customers.size(); ++i) labels[data.customers[i]] = data.labels[i];
    const auto clean = denoise_round(data.table, 0.01);
    auto built = build_matrix(join_labels(clean, labels), spec);
    return {std::move(built.matrix), std::move(built.labels)};
}

struct Split {
    Dataset train;
    Dataset holdout;
};

// Stratified 80/20: fold 0 of a five-way plan is the holdout.
Split stratified_split(const Dataset& d, std::uint64_t seed) {
    const auto plan = make_folds(d.labels, 5, seed);
    const auto tr = plan.rows_not_in(0);
    const auto te = plan.rows_in(0);
    Split s;
    s.train.matrix = d.matrix.select_rows(tr);
    s.holdout.matrix = d.matrix.select_rows(te);
    for (auto i : tr) s.train.labels.push_back(d.labels[i]);
    for (auto i : te) s.holdout.labels.push_back(d.labels[i]);
    return s;
}

TrainConfig standard_learner(std::uint64_t seed = 0) {
    TrainConfig c;
    c.rounds = 150;
    c.learning_rate = 0.05;
    c.max_leaves = 15;
    c.min_child_weight = 1.0;
    c.seed = seed;
    return c;
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

Outcome metric_oracle_equivalence() {
    const auto t0 = Clock::now();
    Rng rng(20240101);
    double worst = 0.0;
    bool g_exact = true;
    for (int t = 0; t < 1000; ++t) {
        const auto inst = random_instance(rng, 1000);
        const auto r = amex_metric(inst.y, inst.p);
        worst = std::max(worst, std::fabs(r.auc_w - oracle::pairwise_auc(inst.y, inst.p)));
        g_exact = g_exact && r.G == 2.0 * r.auc_w - 1.0;
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = worst <= 1e-12 && g_exact && secs < 30.0;
    o.detail = "max |sweep - pairwise| = " + fmt("%.3g", worst) + ", G identity " + (g_exact ? "exact" : "broken") +
               ", " + fmt("%.1f", secs) + " s";
    return o;
}

Outcome metric_hand_cases() {
    Outcome o;
    const auto perfect = amex_metric(std::vector<int>{1, 0, 0}, std::vector<double>{0.9, 0.2, 0.1});
    const auto reversed = amex_metric(std::vector<int>{1, 0, 0}, std::vector<double>{0.1, 0.2, 0.9});
    const auto four = amex_metric(std::vector<int>{1, 0, 1, 0}, std::vector<double>{0.8, 0.7, 0.6, 0.5});
    o.pass = perfect.M == 1.0 && perfect.G == 1.0 && perfect.D == 1.0 && reversed.G == -1.0 && reversed.D == 0.0 &&
             four.G == 0.5 && four.D == 0.5 && four.M == 0.5;
    o.detail = "perfect M=" + format_g17(perfect.M) + ", reversed G=" + format_g17(reversed.G) +
               " D=" + format_g17(reversed.D) + ", 4-row G=" + format_g17(four.G) + " D=" + format_g17(four.D) +
               " M=" + format_g17(four.M);
    return o;
}

Outcome rank_invariance() {
    Rng rng(31337);
    int changed = 0;
    int order_broken = 0;
    for (int t = 0; t < 100; ++t) {
        const auto inst = random_instance(rng, 1000);
        std::vector<double> q;
        for (double v : inst.p) q.push_back(v * v * v + 5.0);
        // The transform must stay strictly increasing on these doubles.
        for (std::size_t i = 0; i < q.size(); ++i) {
            for (std::size_t j = 0; j < q.size(); ++j) {
                if (inst.p[i] < inst.p[j] && !(q[i] < q[j])) ++order_broken;
            }
        }
        const auto a = amex_metric(inst.y, inst.p);
        const auto b = amex_metric(inst.y, q);
        if (a.G != b.G || a.D != b.D || a.M != b.M) ++changed;
    }
    Outcome o;
    o.pass = changed == 0;
    o.detail = std::to_string(changed) + " of 100 instances changed G/D/M (" + std::to_string(order_broken) +
               " pairs lost strict order in double arithmetic)";
    return o;
}

Outcome aggregation_oracle() {
    const auto schema = schema_from_json(Json::parse(R"([
        {"name": "customer_id", "kind": "identifier", "storage": "float32"},
        {"name": "S_2", "kind": "date", "storage": "float32"},
        {"name": "x", "kind": "continuous", "storage": "float32"},
        {"name": "k", "kind": "categorical", "storage": "int8"}
    ])"));
    Rng rng(4242);
    std::vector<std::vector<double>> xs;
    std::vector<std::vector<double>> ks;
    std::string csv = "customer_id,S_2,x,k\n";
    for (int c = 0; c < 10000; ++c) {
        const std::size_t n = 1 + rng.index(13);
        const double miss = 0.4 * rng.unit();
        const double scale = std::pow(10.0, static_cast<double>(rng.index(7)) - 3.0);
        std::vector<double> x, k;
        for (std::size_t i = 0; i < n; ++i) {
            x.push_back(rng.unit() < miss ? kNaN : scale * rng.normal());
            k.push_back(rng.unit() < miss ? kNaN : static_cast<double>(rng.index(6)));
            char date[32];
            std::snprintf(date, sizeof(date), "%d-%02d-20", 2017 + static_cast<int>(i / 12), 1 + static_cast<int>(i % 12));
            csv += "c" + std::to_string(c) + "," + date + "," + (std::isnan(x.back()) ? "" : format_g17(x.back())) +
                   "," + (std::isnan(k.back()) ? "" : format_g17(k.back())) + "\n";
        }
        xs.push_back(std::move(x));
        ks.push_back(std::move(k));
    }
    const auto built = build_matrix(parse_csv_text(csv, schema), AggregationSpec::full());
    const auto& m = built.matrix;
    const auto col = [&](const char* name) { return *m.column_index(name); };

    std::int64_t worst = 0;
    std::size_t mismatches = 0;
    std::size_t checked = 0;
    auto compare = [&](float got, std::optional<long double> want) {
        ++checked;
        if (!want) {
            if (!std::isnan(got)) ++mismatches;
            return;
        }
        if (std::isnan(got)) {
            ++mismatches;
            return;
        }
        const auto u = oracle::float_ulps(got, static_cast<float>(*want));
        worst = std::max(worst, u);
        if (u > 1) ++mismatches;
    };
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto a = oracle::aggregates(xs[r]);
        compare(m.at(r, col("x_mean")), a.mean);
        compare(m.at(r, col("x_std")), a.std);
        compare(m.at(r, col("x_min")), a.min);
        compare(m.at(r, col("x_max")), a.max);
        compare(m.at(r, col("x_last")), a.last);
        compare(m.at(r, col("x_median")), a.median);
        std::optional<long double> lag;
        if (a.last && a.mean) lag = static_cast<float>(*a.last) - static_cast<float>(*a.mean);
        compare(m.at(r, col("x_lag")), lag);

        long double count = 0;
        std::optional<long double> last;
        std::set<double> seen;
        for (double v : ks[r]) {
            if (std::isnan(v)) continue;
            ++count;
            last = v;
            seen.insert(v);
        }
        compare(m.at(r, col("k_count")), count);
        compare(m.at(r, col("k_last")), last);
        compare(m.at(r, col("k_nunique")), static_cast<long double>(seen.size()));
    }
    Outcome o;
    o.pass = mismatches == 0 && m.rows() == 10000;
    o.detail = std::to_string(checked) + " cells, " + std::to_string(mismatches) + " beyond 1 ulp, max " +
               std::to_string(worst) + " ulp";
    return o;
}

Outcome learner_sanity() {
    const auto t0 = Clock::now();
    SynthConfig sep;
    sep.seed = 101;
    sep.separable = true;
    const auto s = synthetic(sep);
    TrainConfig c50 = standard_learner();
    c50.rounds = 50;
    c50.learning_rate = 0.1;
    const auto sep_model = train(s.matrix, s.labels, c50);
    const double train_auc = weighted_auc(s.labels, predict(sep_model, s.matrix));

    SynthConfig std_cfg;
    std_cfg.seed = 102;
    const auto split = stratified_split(synthetic(std_cfg), 7);
    const auto model = train(split.train.matrix, split.train.labels, standard_learner());
    const auto r = amex_metric(split.holdout.labels, predict(model, split.holdout.matrix));
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = train_auc >= 0.99 && r.M >= 0.60 && secs < 120.0;
    o.detail = "separable training AUC " + fmt("%.4f", train_auc) + " (50 rounds), standard holdout M " +
               fmt("%.4f", r.M) + ", " + fmt("%.1f", secs) + " s";
    return o;
}

Outcome goss_fidelity() {
    SynthConfig cfg;
    cfg.seed = 103;
    const auto split = stratified_split(synthetic(cfg), 8);
    const auto full = train(split.train.matrix, split.train.labels, standard_learner(5));
    TrainConfig gc = standard_learner(5);
    gc.goss_a = 0.2;
    gc.goss_b = 0.1;
    const auto goss = train(split.train.matrix, split.train.labels, gc);
    const double auc_full = weighted_auc(split.holdout.labels, predict(full, split.holdout.matrix));
    const double auc_goss = weighted_auc(split.holdout.labels, predict(goss, split.holdout.matrix));

    // Monte-Carlo: rescaled small-gradient mass is unbiased.
    Rng rng(77);
    std::vector<GradientPair> g(2000);
    for (auto& p : g) p = {rng.normal(), 0.25};
    std::vector<std::size_t> order(g.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return std::fabs(g[a].g) > std::fabs(g[b].g); });
    std::vector<bool> top(g.size(), false);
    for (std::size_t i = 0; i < 400; ++i) top[order[i]] = true;
    double truth = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!top[i]) truth += std::fabs(g[i].g);
    }
    double est = 0.0;
    for (int d = 0; d < 10000; ++d) {
        const auto s = goss_sample(g, 0.2, 0.1, static_cast<std::uint64_t>(d));
        for (std::size_t i = 0; i < s.rows.size(); ++i) {
            if (!top[s.rows[i]]) est += s.multipliers[i] * std::fabs(g[s.rows[i]].g);
        }
    }
    est /= 10000.0;
    const double rel = std::fabs(est - truth) / truth;
    Outcome o;
    o.pass = std::fabs(auc_full - auc_goss) <= 0.02 && rel <= 0.02;
    o.detail = "holdout AUC full " + fmt("%.4f", auc_full) + " vs GOSS " + fmt("%.4f", auc_goss) +
               ", Monte-Carlo relative error " + fmt("%.4f", rel);
    return o;
}

Outcome no_leakage() {
    double lo = 1.0;
    double hi = 0.0;
    std::size_t rows = 0;
    std::size_t excluded = 0;
    int inside = 0;
    for (int s = 0; s < 20; ++s) {
        SynthConfig cfg;
        cfg.n_customers = 2000;
        cfg.seed = 500 + static_cast<std::uint64_t>(s);
        auto d = synthetic(cfg);
        Rng shuffle(900 + static_cast<std::uint64_t>(s));
        shuffle.shuffle(d.labels);
        const auto plan = make_folds(d.labels, 5, static_cast<std::uint64_t>(s));
        TrainConfig c = standard_learner(static_cast<std::uint64_t>(s));
        c.rounds = 60;
        const auto r = train_oof(d.matrix, d.labels, plan, c);
        const double auc = weighted_auc(d.labels, r.oof.prediction);
        lo = std::min(lo, auc);
        hi = std::max(hi, auc);
        if (auc >= 0.45 && auc <= 0.55) ++inside;
        for (std::size_t i = 0; i < d.labels.size(); ++i) {
            ++rows;
            const auto& seen = r.train_rows[r.oof.fold[i]];
            if (r.oof.fold[i] == plan.assignment[i] && !std::binary_search(seen.begin(), seen.end(), i)) ++excluded;
        }
    }
    Outcome o;
    o.pass = inside == 20 && excluded == rows;
    o.detail = "permuted-label OOF AUC in [" + fmt("%.4f", lo) + ", " + fmt("%.4f", hi) + "], " +
               std::to_string(inside) + "/20 seeds inside; row exclusion proven for " + std::to_string(excluded) +
               "/" + std::to_string(rows) + " rows";
    return o;
}

Outcome stacking_non_degradation() {
    int passes = 0;
    std::string detail;
    AggregationSpec recent;
    recent.continuous_stats = {ContinuousStat::Mean, ContinuousStat::Last};
    recent.lag_enabled = true;
    recent.recent_window = 3;
    for (int s = 0; s < 5; ++s) {
        SynthConfig cfg;
        cfg.seed = 700 + static_cast<std::uint64_t>(s);
        const auto split = stratified_split(synthetic(cfg), static_cast<std::uint64_t>(s));
        const auto recent_split = stratified_split(synthetic(cfg, recent), static_cast<std::uint64_t>(s));
        const auto plan = make_folds(split.train.labels, 5, 40 + static_cast<std::uint64_t>(s));

        const auto a = train_oof(split.train.matrix, split.train.labels, plan, standard_learner(1));
        const auto b = train_oof(recent_split.train.matrix, recent_split.train.labels, plan, standard_learner(2));
        const auto a_hold = predict_with_fold_models(a.models, split.holdout.matrix);
        const auto b_hold = predict_with_fold_models(b.models, recent_split.holdout.matrix);
        const double best_base = std::max(amex_metric(split.holdout.labels, a_hold).M,
                                          amex_metric(split.holdout.labels, b_hold).M);

        const std::vector<std::vector<double>> oof{a.oof.prediction, b.oof.prediction};
        const std::vector<std::vector<double>> hold{a_hold, b_hold};
        const auto meta = train_meta(append_meta(split.train.matrix, oof), split.train.labels, plan, standard_learner(3));
        const auto meta_hold = predict_with_fold_models(meta.models, append_meta(split.holdout.matrix, hold));
        const double meta_m = amex_metric(split.holdout.labels, meta_hold).M;
        const bool ok = meta_m >= best_base - 0.005;
        passes += ok ? 1 : 0;
        detail += (s ? "; " : "") + std::string("seed ") + std::to_string(s) + ": meta " + fmt("%.4f", meta_m) +
                  " vs best base " + fmt("%.4f", best_base);
    }
    Outcome o;
    o.pass = passes >= 3;
    o.detail = std::to_string(passes) + "/5 seeds pass (" + detail + ")";
    return o;
}

// Independent grid oracle: every (i, j, 100 - i - j) / 100 point, direct sums.
double grid_oracle(const std::vector<std::vector<double>>& preds, const std::vector<int>& y) {
    double best = -1.0;
    std::vector<double> mix(y.size());
    for (int i = 0; i <= 100; ++i) {
        for (int j = 0; j <= 100 - i; ++j) {
            const int k = 100 - i - j;
            const double wi = i / 100.0;
            const double wj = j / 100.0;
            const double wk = k / 100.0;
            for (std::size_t r = 0; r < y.size(); ++r) mix[r] = wi * preds[0][r] + wj * preds[1][r] + wk * preds[2][r];
            best = std::max(best, amex_metric(y, mix).M);
        }
    }
    return best;
}

Outcome blend_correctness() {
    Rng rng(909);
    int equal = 0;
    const int instances = 12;
    double worst = 0.0;
    for (int t = 0; t < instances; ++t) {
        const std::size_t n = 50 + rng.index(451);
        std::vector<int> y(n);
        std::vector<double> latent(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng.unit() < 0.3 ? 1 : 0;
            latent[i] = 1.2 * y[i] + rng.normal();
        }
        y[0] = 1;
        y[1] = 0;
        std::vector<std::vector<double>> preds(3, std::vector<double>(n));
        for (auto& p : preds) {
            const double noise = 0.5 + 1.5 * rng.unit();
            for (std::size_t i = 0; i < n; ++i) p[i] = 1.0 / (1.0 + std::exp(-(latent[i] + noise * rng.normal())));
        }
        const auto r = optimize_weights(preds, y);
        const double want = grid_oracle(preds, y);
        worst = std::max(worst, std::fabs(r.M - want));
        if (r.M == want) ++equal;
    }

    bool identities = true;
    for (int t = 0; t < 200; ++t) {
        const std::size_t members = 2 + rng.index(4);
        std::vector<std::vector<double>> preds(members, std::vector<double>(100));
        for (auto& p : preds) {
            for (auto& v : p) v = rng.unit();
        }
        std::vector<double> onehot(members, 0.0);
        const std::size_t hot = rng.index(members);
        onehot[hot] = 1.0;
        identities = identities && blend(preds, onehot) == preds[hot];
        std::vector<int> units(members, 0);
        for (int u = 0; u < 100; ++u) units[rng.index(members)]++;
        std::vector<double> w;
        for (int u : units) w.push_back(u / 100.0);
        double sum = 0.0;
        for (double v : w) sum += v;
        if (std::fabs(sum - 1.0) > 1e-12) continue;
        const auto out = blend(preds, w);
        for (std::size_t j = 0; j < 100; ++j) {
            double mn = preds[0][j];
            double mx = preds[0][j];
            for (const auto& p : preds) {
                mn = std::min(mn, p[j]);
                mx = std::max(mx, p[j]);
            }
            identities = identities && out[j] >= mn && out[j] <= mx;
        }
    }
    Outcome o;
    o.pass = equal == instances && identities;
    o.detail = std::to_string(equal) + "/" + std::to_string(instances) + " instances match the exhaustive grid (max |dM| " +
               fmt("%.3g", worst) + "), identities " + (identities ? "hold" : "broken");
    return o;
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / "credit_acceptance_determinism";
    fs::remove_all(dir);
    SynthConfig c;
    c.n_customers = 2000;
    c.seed = 1010;
    const auto d = generate(c);
    write_file(dir / "data.csv", table_to_csv(d.table));
    write_file(dir / "labels.csv", labels_to_csv(d.customers, d.labels));
    write_file(dir / "schema.json", dump_json(schema_to_json(synth_schema(c))));
    const Json doc = Json::parse(R"({
        "data": "data.csv", "labels": "labels.csv", "schema": "schema.json", "output_dir": "run",
        "folds": 5, "seed": 42, "blend_step": 0.02,
        "members": [
            {"name": "module_a", "learner": {"rounds": 40, "max_leaves": 15, "goss": true}},
            {"name": "local_recent", "features": {"continuous_stats": ["mean", "last"], "lag": true, "recent_window": 6},
             "learner": {"rounds": 40, "max_leaves": 15}},
            {"name": "module_b", "features": {"continuous_stats": ["median", "min", "max"]},
             "meta_from": ["module_a", "local_recent"], "learner": {"rounds": 40, "max_leaves": 15}, "test_path": "refit"}
        ]
    })");
    std::vector<std::map<std::string, std::string>> runs;
    for (int threads : {1, 4, 1, 3}) {
        auto config = pipeline_config_from_json(doc, dir);
        config.threads = threads;
        config.output_dir = dir / ("run_" + std::to_string(runs.size()));
        const auto result = run_pipeline(config);
        std::map<std::string, std::string> files;
        for (const auto& e : fs::recursive_directory_iterator(result.run_dir)) {
            if (e.is_regular_file()) files[fs::relative(e.path(), result.run_dir).generic_string()] = read_file(e.path());
        }
        runs.push_back(std::move(files));
    }
    std::size_t differing = 0;
    for (std::size_t i = 1; i < runs.size(); ++i) {
        if (runs[i].size() != runs[0].size()) ++differing;
        for (const auto& [path, bytes] : runs[0]) {
            const auto it = runs[i].find(path);
            if (it == runs[i].end() || it->second != bytes) ++differing;
        }
    }
    std::size_t svgs = 0;
    std::size_t models = 0;
    for (const auto& [path, bytes] : runs[0]) {
        svgs += path.ends_with(".svg");
        models += path.ends_with(".model.json");
    }
    fs::remove_all(dir);
    Outcome o;
    o.pass = differing == 0 && runs[0].count("manifest.json") && svgs > 0 && models > 0;
    o.detail = "4 runs at threads 1/4/1/3, " + std::to_string(runs[0].size()) + " files each (" +
               std::to_string(models) + " models, " + std::to_string(svgs) + " SVGs), " + std::to_string(differing) +
               " differences";
    return o;
}

Outcome importance_accounting() {
    SynthConfig cfg;
    cfg.seed = 1111;
    cfg.n_continuous = 41;
    cfg.n_categorical = 0;
    cfg.signal_features = {0};
    const auto d = synthetic(cfg);
    const auto plan = make_folds(d.labels, 5, 3);
    const auto r = train_oof(d.matrix, d.labels, plan, standard_learner(9));

    bool sums_exact = true;
    int first_total = 0;
    int first_average = 0;
    const auto is_signal = [](const std::string& column) { return column.rfind("c_0_", 0) == 0; };
    const auto top = [](const std::map<std::string, double>& m) {
        return std::max_element(m.begin(), m.end(), [](auto& a, auto& b) { return a.second < b.second; })->first;
    };
    for (const auto& model : r.models) {
        const auto total = importance(model, ImportanceKind::TotalGain);
        double by_column = 0.0;
        for (const auto& [col, v] : total) by_column += v;
        double by_split = 0.0;
        for (const auto& s : model.split_records) by_split += s.gain;
        sums_exact = sums_exact && by_column == by_split;
        first_total += is_signal(top(total)) ? 1 : 0;
        first_average += is_signal(top(importance(model, ImportanceKind::AverageGain))) ? 1 : 0;
    }
    double worst_end = 0.0;
    for (auto kind : {ImportanceKind::TotalGain, ImportanceKind::AverageGain}) {
        const auto report = build_importance_report(r.models, kind);
        worst_end = std::max(worst_end, std::fabs(report.cumulative.back().second - 1.0));
    }
    Outcome o;
    o.pass = sums_exact && worst_end <= 1e-9 && first_total >= 4 && first_average >= 4;
    o.detail = std::string("gain sums ") + (sums_exact ? "exact" : "inexact") + ", curve end error " +
               fmt("%.3g", worst_end) + ", signal first in " + std::to_string(first_total) + "/5 folds (total gain), " +
               std::to_string(first_average) + "/5 (average gain)";
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 metric oracle equivalence", metric_oracle_equivalence},
        {"2 metric hand cases", metric_hand_cases},
        {"3 rank invariance", rank_invariance},
        {"4 aggregation oracle", aggregation_oracle},
        {"5 learner sanity", learner_sanity},
        {"6 GOSS fidelity", goss_fidelity},
        {"7 no leakage", no_leakage},
        {"8 stacking non-degradation", stacking_non_degradation},
        {"9 blend correctness", blend_correctness},
        {"10 determinism", determinism},
        {"11 importance accounting", importance_accounting},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("threw: ") + e.what();
        }
        std::printf("[%s] criterion %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
