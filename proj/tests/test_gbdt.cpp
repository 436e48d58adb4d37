#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "credit/error.hpp"
#include "credit/gbdt.hpp"
#include "credit/metric.hpp"
#include "oracles.hpp"

using namespace credit;

namespace {

FeatureMatrix matrix_of(std::size_t rows, std::size_t cols, const std::function<float(std::size_t, std::size_t)>& f) {
    FeatureMatrix m;
    for (std::size_t r = 0; r < rows; ++r) m.customer_ids.push_back("r" + std::to_string(r));
    for (std::size_t c = 0; c < cols; ++c) m.column_names.push_back("f" + std::to_string(c));
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) m.values.push_back(f(r, c));
    }
    return m;
}

// Label depends on f0 (with noise); the rest is noise.
struct Problem {
    FeatureMatrix matrix;
    std::vector<int> labels;
};

Problem noisy_problem(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<float> cells(rows * cols);
    for (auto& v : cells) v = static_cast<float>(rng.normal());
    Problem p;
    p.matrix = matrix_of(rows, cols, [&](std::size_t r, std::size_t c) { return cells[r * cols + c]; });
    for (std::size_t r = 0; r < rows; ++r) {
        const double z = 2.0 * cells[r * cols] + 0.5 * rng.normal();
        p.labels.push_back(z > 0.5 ? 1 : 0);
    }
    return p;
}

// Independent routing by raw thresholds.
std::size_t leaf_of(const Tree& tree, const FeatureMatrix& m, std::size_t row) {
    std::size_t node = 0;
    while (!tree.nodes[node].is_leaf) {
        const auto& n = tree.nodes[node];
        const float v = m.at(row, static_cast<std::size_t>(n.feature));
        const bool left = std::isnan(v) ? n.missing_left : static_cast<double>(v) <= n.threshold;
        node = static_cast<std::size_t>(left ? n.left : n.right);
    }
    return node;
}

double log_loss(std::span<const int> y, std::span<const double> p) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s -= y[i] ? std::log(p[i]) : std::log(1.0 - p[i]);
    return s / static_cast<double>(y.size());
}

} // namespace

TEST_CASE("bins: constant column and missing cells") {
    const auto m = matrix_of(3, 2, [](std::size_t r, std::size_t c) {
        return c == 0 ? 1.0f : (r == 1 ? std::numeric_limits<float>::quiet_NaN() : static_cast<float>(r));
    });
    const auto b = build_bins(m, 255);
    CHECK(b.finite_bins(0) == 1);
    CHECK(b.bin_of(0, 1.0f) == 0);
    CHECK(b.bin_of(1, std::numeric_limits<float>::quiet_NaN()) == b.missing_bin(1));
    CHECK(b.bin_of(1, 0.0f) != b.bin_of(1, 2.0f));
    CHECK_THROWS_AS(build_bins(m, 1), Error);
}

TEST_CASE("bins: 1..1000 into 4 bins match a direct quantile oracle") {
    const auto m = matrix_of(1000, 1, [](std::size_t r, std::size_t) { return static_cast<float>(r + 1); });
    const auto b = build_bins(m, 4);
    REQUIRE(b.finite_bins(0) == 4);
    // Oracle: the j-th quarter of the sorted values ends at value 250 j.
    std::vector<int> counts(4, 0);
    for (int v = 1; v <= 1000; ++v) counts[b.bin_of(0, static_cast<float>(v))]++;
    for (int j = 0; j < 4; ++j) {
        int want = 0;
        for (int v = 1; v <= 1000; ++v) want += (v > 250 * j && v <= 250 * (j + 1)) ? 1 : 0;
        CHECK(counts[j] == want);
    }
}

TEST_CASE("bins are monotone in the value") {
    Rng rng(2);
    const auto m = matrix_of(500, 1, [&](std::size_t, std::size_t) { return static_cast<float>(rng.normal()); });
    const auto b = build_bins(m, 16);
    for (int i = 0; i < 1000; ++i) {
        const float x = static_cast<float>(3 * rng.normal());
        const float y = static_cast<float>(3 * rng.normal());
        if (x <= y) CHECK(b.bin_of(0, x) <= b.bin_of(0, y));
    }
}

TEST_CASE("logistic gradient and hessian") {
    const auto g = logistic_grad_hess(std::vector<int>{1, 0, 1}, std::vector<double>{0.0, 0.0, 50.0});
    CHECK(g[0].g == -0.5);
    CHECK(g[0].h == 0.25);
    CHECK(g[1].g == 0.5);
    CHECK(g[1].h == 0.25);
    CHECK(std::fabs(g[2].g) < 1e-20);
    CHECK(g[2].h < 1e-20);
}

TEST_CASE("goss sample example and disabled mode") {
    std::vector<GradientPair> g;
    for (double v : {0.9, -0.5, 0.4, 0.1, -0.05}) g.push_back({v, 0.25});
    const auto s = goss_sample(g, 0.2, 0.2, 3);
    REQUIRE(s.rows.size() == 2);
    const auto top = std::find(s.rows.begin(), s.rows.end(), 0u);
    REQUIRE(top != s.rows.end());
    for (std::size_t i = 0; i < s.rows.size(); ++i) CHECK(s.multipliers[i] == (s.rows[i] == 0 ? 1.0 : 4.0));
    CHECK(std::is_sorted(s.rows.begin(), s.rows.end()));

    const auto all = goss_sample(g, 1.0, 0.0, 3);
    CHECK(all.rows == std::vector<std::size_t>{0, 1, 2, 3, 4});
    CHECK(all.multipliers == std::vector<double>(5, 1.0));

    try {
        goss_sample(g, 0.5, 0.0, 1);
        FAIL("expected DegenerateSampling");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateSampling);
    }
}

TEST_CASE("goss rescaled small-gradient sum is unbiased") {
    Rng rng(4);
    std::vector<GradientPair> g(1000);
    for (auto& p : g) p = {rng.normal(), 0.25};
    const auto s0 = goss_sample(g, 0.2, 0.1, 0);
    std::vector<bool> top(g.size(), false);
    // Top rows are the same every draw; find them from one with b tiny.
    std::vector<std::size_t> order(g.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return std::fabs(g[a].g) > std::fabs(g[b].g); });
    for (std::size_t i = 0; i < 200; ++i) top[order[i]] = true;
    double truth = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) if (!top[i]) truth += std::fabs(g[i].g);
    double est = 0.0;
    const int draws = 10000;
    for (int d = 0; d < draws; ++d) {
        const auto s = goss_sample(g, 0.2, 0.1, static_cast<std::uint64_t>(d));
        for (std::size_t i = 0; i < s.rows.size(); ++i) {
            if (!top[s.rows[i]]) est += s.multipliers[i] * std::fabs(g[s.rows[i]].g);
        }
    }
    est /= draws;
    CHECK(std::fabs(est - truth) / truth < 0.02);
    CHECK(s0.rows.size() == 300);
}

TEST_CASE("rounds = 0 gives the label mean everywhere") {
    const auto p = noisy_problem(100, 3, 1);
    TrainConfig c;
    c.rounds = 0;
    const auto model = train(p.matrix, p.labels, c);
    CHECK(model.trees.empty());
    const double mean = std::accumulate(p.labels.begin(), p.labels.end(), 0.0) / 100.0;
    for (double v : predict(model, p.matrix)) CHECK(std::fabs(v - mean) < 1e-12);
}

TEST_CASE("training errors") {
    const auto p = noisy_problem(20, 2, 1);
    try {
        train(p.matrix, std::vector<int>(20, 1), TrainConfig{});
        FAIL("expected SingleClass");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingleClass);
    }
    TrainConfig bad;
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(train(p.matrix, p.labels, bad), Error);
    TrainConfig goss;
    goss.goss_a = 0.8;
    goss.goss_b = 0.3;
    CHECK_THROWS_AS(goss.validate(), Error);
}

TEST_CASE("separable data is learned") {
    Rng rng(8);
    const auto m = matrix_of(200, 3, [&](std::size_t, std::size_t) { return static_cast<float>(rng.normal()); });
    std::vector<int> y;
    for (std::size_t r = 0; r < 200; ++r) y.push_back(m.at(r, 0) > 0.0f ? 1 : 0);
    TrainConfig c;
    c.rounds = 50;
    const auto model = train(m, y, c);
    CHECK(weighted_auc(y, predict(model, m)) >= 0.99);
}

TEST_CASE("single split tree is monotone across its threshold") {
    const auto m = matrix_of(100, 1, [](std::size_t r, std::size_t) { return static_cast<float>(r); });
    std::vector<int> y;
    for (std::size_t r = 0; r < 100; ++r) y.push_back(r >= 60 ? 1 : 0);
    TrainConfig c;
    c.rounds = 1;
    c.max_leaves = 2;
    const auto model = train(m, y, c);
    REQUIRE(model.trees.size() == 1);
    const auto& root = model.trees[0].nodes[0];
    REQUIRE_FALSE(root.is_leaf);
    CHECK(root.threshold > 59.0);
    CHECK(root.threshold < 60.0);
    const auto p = predict(model, m);
    for (std::size_t r = 1; r < 100; ++r) CHECK(p[r] >= p[r - 1]);
    CHECK(p[99] > p[0]);
}

TEST_CASE("missing rows route to a finite prediction") {
    const auto p = noisy_problem(300, 4, 5);
    TrainConfig c;
    c.rounds = 10;
    const auto model = train(p.matrix, p.labels, c);
    const auto nan = matrix_of(2, 4, [](std::size_t, std::size_t) { return std::numeric_limits<float>::quiet_NaN(); });
    for (double v : predict(model, nan)) CHECK(std::isfinite(v));
}

TEST_CASE("predict agrees with an independent tree walk") {
    const auto p = noisy_problem(400, 5, 6);
    TrainConfig c;
    c.rounds = 15;
    c.max_leaves = 8;
    const auto model = train(p.matrix, p.labels, c);
    const auto raw = predict_raw(model, p.matrix);
    for (std::size_t r = 0; r < p.matrix.rows(); ++r) {
        double s = model.base_score;
        for (const auto& t : model.trees) s += t.nodes[leaf_of(t, p.matrix, r)].leaf_value;
        CHECK(std::fabs(s - raw[r]) < 1e-12);
    }
}

TEST_CASE("predict ignores unused appended columns and needs used ones") {
    const auto p = noisy_problem(300, 3, 7);
    TrainConfig c;
    c.rounds = 10;
    const auto model = train(p.matrix, p.labels, c);
    auto wider = p.matrix;
    std::vector<float> extra(wider.rows(), 123.0f);
    wider.add_column("unused", extra);
    CHECK(predict(model, wider) == predict(model, p.matrix));
    const std::vector<std::string> keep{"f1", "f2"};
    try {
        predict(model, p.matrix.select_columns(keep));
        FAIL("expected MissingFeatureColumn");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingFeatureColumn);
    }
}

TEST_CASE("training log-loss never increases without sampling") {
    const auto p = noisy_problem(500, 6, 9);
    for (double lr : {0.1, 0.3}) {
        TrainConfig c;
        c.rounds = 40;
        c.learning_rate = lr;
        const auto model = train(p.matrix, p.labels, c);
        double prev = log_loss(p.labels, predict(model, p.matrix, 0));
        for (std::size_t k = 1; k <= model.trees.size(); ++k) {
            const double cur = log_loss(p.labels, predict(model, p.matrix, k));
            CHECK(cur <= prev + 1e-6);
            prev = cur;
        }
    }
}

TEST_CASE("leaves of the first tree respect min_child_weight") {
    const auto p = noisy_problem(400, 4, 10);
    for (double mcw : {1.0, 5.0, 20.0}) {
        TrainConfig c;
        c.rounds = 1;
        c.max_leaves = 31;
        c.min_child_weight = mcw;
        const auto model = train(p.matrix, p.labels, c);
        const auto g = logistic_grad_hess(p.labels, std::vector<double>(400, model.base_score));
        std::map<std::size_t, double> mass;
        for (std::size_t r = 0; r < 400; ++r) mass[leaf_of(model.trees[0], p.matrix, r)] += g[r].h;
        for (const auto& [leaf, h] : mass) CHECK(h >= mcw);
    }
}

TEST_CASE("models are identical across thread counts") {
    const auto p = noisy_problem(600, 8, 11);
    TrainConfig c;
    c.rounds = 20;
    c.goss_a = 0.2;
    c.goss_b = 0.1;
    c.seed = 99;
    c.threads = 1;
    const std::string one = dump_json(model_to_json(train(p.matrix, p.labels, c)));
    c.threads = 4;
    CHECK(dump_json(model_to_json(train(p.matrix, p.labels, c))) == one);
}

TEST_CASE("model json round trip preserves predictions") {
    const auto p = noisy_problem(300, 4, 12);
    TrainConfig c;
    c.rounds = 12;
    const auto model = train(p.matrix, p.labels, c);
    const auto back = model_from_json(Json::parse(dump_json(model_to_json(model))));
    CHECK(predict(back, p.matrix) == predict(model, p.matrix));
    CHECK(dump_json(model_to_json(back)) == dump_json(model_to_json(model)));
}

TEST_CASE("importance accounting") {
    BoostedModel single;
    single.feature_names = {"f"};
    single.split_records = {{"f", 12.3}};
    CHECK(importance(single, ImportanceKind::TotalGain).at("f") == 12.3);
    CHECK(importance(single, ImportanceKind::AverageGain).at("f") == 12.3);

    const auto p = noisy_problem(800, 10, 13);
    TrainConfig c;
    c.rounds = 30;
    const auto model = train(p.matrix, p.labels, c);
    const auto total = importance(model, ImportanceKind::TotalGain);
    double by_column = 0.0;
    for (const auto& [col, v] : total) by_column += v;
    double by_split = 0.0;
    for (const auto& s : model.split_records) by_split += s.gain;
    CHECK(by_column == by_split);

    const auto avg = importance(model, ImportanceKind::AverageGain);
    std::map<std::string, int> splits;
    for (const auto& s : model.split_records) splits[s.column]++;
    for (const auto& [col, v] : avg) CHECK(std::fabs(v - total.at(col) / splits.at(col)) <= 1e-12 * total.at(col));
    CHECK(total.count("f0"));
    for (const auto& [col, v] : total) CHECK(v <= total.at("f0"));
    for (const auto& [col, v] : avg) CHECK(v <= avg.at("f0"));

    const auto norm = normalize_importance(total);
    double s = 0.0;
    for (const auto& [col, v] : norm) s += v;
    CHECK(std::fabs(s - 1.0) < 1e-12);
    CHECK(normalize_importance({}).empty());
}

TEST_CASE("train config json") {
    const auto c = train_config_from_json(Json::parse(R"({"rounds": 7, "goss": true})"));
    CHECK(c.rounds == 7);
    CHECK(c.goss_a == 0.2);
    CHECK(c.goss_b == 0.1);
    CHECK(dump_json(to_json(train_config_from_json(to_json(c)))) == dump_json(to_json(c)));
    CHECK_THROWS_AS(train_config_from_json(Json::parse(R"({"max_bins": 300})")), Error);
}
