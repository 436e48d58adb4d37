#include "credit/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "credit/error.hpp"
#include "credit/metric.hpp"

namespace credit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Recorded split gains live on a 2^-20 grid, so any summation order of them
// is exact while totals stay below 2^33.
double quantize_gain(double gain) { return std::ldexp(std::nearbyint(std::ldexp(gain, 20)), -20); }

std::size_t ceil_fraction(double fraction, std::size_t n) {
    const double raw = fraction * static_cast<double>(n);
    return std::min(n, static_cast<std::size_t>(std::ceil(raw - 1e-9)));
}

struct SplitCandidate {
    double gain = 0.0;
    int feature = -1;
    int threshold_bin = -1;
    bool missing_left = true;
    bool valid() const { return feature >= 0; }
};

struct BinnedData {
    std::vector<std::vector<std::uint8_t>> columns; // column-major
};

BinnedData bin_matrix(const FeatureMatrix& m, const BinMapper& mapper, int threads) {
    BinnedData out;
    out.columns.resize(m.cols());
    parallel_for(m.cols(), threads, [&](std::size_t c) {
        auto& col = out.columns[c];
        col.resize(m.rows());
        for (std::size_t r = 0; r < m.rows(); ++r) col[r] = mapper.bin_of(c, m.at(r, c));
    });
    return out;
}

class TreeGrower {
public:
    TreeGrower(const BinnedData& binned, const BinMapper& mapper, const TrainConfig& config,
               const std::vector<double>& g, const std::vector<double>& h)
        : binned_(binned), mapper_(mapper), config_(config), g_(g), h_(h) {}

    Tree grow(std::vector<std::uint32_t> root_rows) {
        Tree tree;
        tree.nodes.emplace_back();
        std::vector<Leaf> leaves;
        leaves.push_back(make_leaf(0, std::move(root_rows)));

        while (static_cast<int>(leaves.size()) < config_.max_leaves) {
            std::size_t pick = leaves.size();
            for (std::size_t i = 0; i < leaves.size(); ++i) {
                if (!leaves[i].best.valid()) continue;
                if (pick == leaves.size() || leaves[i].best.gain > leaves[pick].best.gain) pick = i;
            }
            if (pick == leaves.size()) break;

            Leaf parent = std::move(leaves[pick]);
            const SplitCandidate& s = parent.best;
            const auto& col = binned_.columns[static_cast<std::size_t>(s.feature)];
            const std::uint8_t miss = mapper_.missing_bin(static_cast<std::size_t>(s.feature));
            std::vector<std::uint32_t> left_rows;
            std::vector<std::uint32_t> right_rows;
            for (std::uint32_t r : parent.rows) {
                const std::uint8_t b = col[r];
                const bool go_left = b == miss ? s.missing_left : b <= s.threshold_bin;
                (go_left ? left_rows : right_rows).push_back(r);
            }

            const int left_id = static_cast<int>(tree.nodes.size());
            const int right_id = left_id + 1;
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            TreeNode& node = tree.nodes[static_cast<std::size_t>(parent.node)];
            node.is_leaf = false;
            node.feature = s.feature;
            node.threshold_bin = s.threshold_bin;
            node.threshold = mapper_.upper_edges[static_cast<std::size_t>(s.feature)][static_cast<std::size_t>(s.threshold_bin)];
            node.missing_left = s.missing_left;
            node.left = left_id;
            node.right = right_id;
            node.gain = quantize_gain(s.gain);

            leaves[pick] = make_leaf(left_id, std::move(left_rows));
            leaves.push_back(make_leaf(right_id, std::move(right_rows)));
        }

        for (const Leaf& leaf : leaves) {
            TreeNode& node = tree.nodes[static_cast<std::size_t>(leaf.node)];
            node.leaf_value = -leaf.sum_g / (leaf.sum_h + config_.l2_lambda) * config_.learning_rate;
        }
        return tree;
    }

private:
    struct Leaf {
        int node = 0;
        std::vector<std::uint32_t> rows;
        double sum_g = 0.0;
        double sum_h = 0.0;
        SplitCandidate best;
    };

    Leaf make_leaf(int node, std::vector<std::uint32_t> rows) {
        Leaf leaf;
        leaf.node = node;
        leaf.rows = std::move(rows);
        for (std::uint32_t r : leaf.rows) {
            leaf.sum_g += g_[r];
            leaf.sum_h += h_[r];
        }
        leaf.best = find_split(leaf);
        return leaf;
    }

    SplitCandidate find_split(const Leaf& leaf) const {
        const std::size_t n_cols = binned_.columns.size();
        std::vector<SplitCandidate> per_column(n_cols);
        if (leaf.rows.size() < 2) return {};
        parallel_for(n_cols, config_.threads, [&](std::size_t c) { per_column[c] = best_for_column(leaf, c); });
        SplitCandidate best;
        for (const auto& cand : per_column) {
            if (cand.valid() && (!best.valid() || cand.gain > best.gain)) best = cand;
        }
        return best;
    }

    SplitCandidate best_for_column(const Leaf& leaf, std::size_t c) const {
        const std::size_t finite = mapper_.finite_bins(c);
        const std::size_t miss = finite;
        std::vector<double> hg(finite + 1, 0.0);
        std::vector<double> hh(finite + 1, 0.0);
        std::vector<std::uint32_t> hc(finite + 1, 0);
        const auto& col = binned_.columns[c];
        for (std::uint32_t r : leaf.rows) {
            const std::uint8_t b = col[r];
            hg[b] += g_[r];
            hh[b] += h_[r];
            ++hc[b];
        }
        const double lambda = config_.l2_lambda;
        const double mcw = config_.min_child_weight;
        const double parent_score = leaf.sum_g * leaf.sum_g / (leaf.sum_h + lambda);
        const auto total_count = static_cast<std::uint32_t>(leaf.rows.size());

        SplitCandidate best;
        auto consider = [&](double gl, double hl, std::uint32_t cl, int t, bool missing_left) {
            const double gr = leaf.sum_g - gl;
            const double hr = leaf.sum_h - hl;
            const std::uint32_t cr = total_count - cl;
            if (cl == 0 || cr == 0 || hl < mcw || hr < mcw) return;
            const double gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent_score);
            if (gain > 0.0 && (!best.valid() || gain > best.gain)) {
                best = SplitCandidate{gain, static_cast<int>(c), t, missing_left};
            }
        };

        const bool has_missing = hc[miss] > 0;
        double gl = 0.0;
        double hl = 0.0;
        std::uint32_t cl = 0;
        for (std::size_t t = 0; t < finite; ++t) {
            gl += hg[t];
            hl += hh[t];
            cl += hc[t];
            if (has_missing) {
                consider(gl, hl, cl, static_cast<int>(t), false);
                consider(gl + hg[miss], hl + hh[miss], cl + hc[miss], static_cast<int>(t), true);
            } else {
                // No missing rows here: the direction cannot change the gain,
                // so unseen missing values follow the heavier child.
                const bool heavier_left = hl >= leaf.sum_h - hl;
                consider(gl, hl, cl, static_cast<int>(t), heavier_left);
            }
        }
        return best;
    }

    const BinnedData& binned_;
    const BinMapper& mapper_;
    const TrainConfig& config_;
    const std::vector<double>& g_;
    const std::vector<double>& h_;
};

double route_binned(const Tree& tree, const BinnedData& binned, const BinMapper& mapper, std::size_t row) {
    std::size_t id = 0;
    while (!tree.nodes[id].is_leaf) {
        const TreeNode& n = tree.nodes[id];
        const auto f = static_cast<std::size_t>(n.feature);
        const std::uint8_t b = binned.columns[f][row];
        const bool left = b == mapper.missing_bin(f) ? n.missing_left : b <= n.threshold_bin;
        id = static_cast<std::size_t>(left ? n.left : n.right);
    }
    return tree.nodes[id].leaf_value;
}

void rebuild_split_records(BoostedModel& model) {
    model.split_records.clear();
    for (const auto& tree : model.trees) {
        for (const auto& node : tree.nodes) {
            if (!node.is_leaf) {
                model.split_records.push_back({model.feature_names[static_cast<std::size_t>(node.feature)], node.gain});
            }
        }
    }
}

} // namespace

// ============================================================================
// Binning
// ============================================================================

std::uint8_t BinMapper::bin_of(std::size_t col, float value) const {
    if (std::isnan(value)) return missing_bin(col);
    const auto& edges = upper_edges[col];
    const auto it = std::lower_bound(edges.begin(), edges.end(), static_cast<double>(value));
    // The last edge is +inf, so `it` is always dereferenceable.
    return static_cast<std::uint8_t>(it - edges.begin());
}

BinMapper build_bins(const FeatureMatrix& matrix, int max_bins) {
    if (matrix.rows() == 0 || matrix.cols() == 0) throw Error(ErrorCode::EmptyMatrix, "cannot bin an empty matrix");
    if (max_bins < 2 || max_bins > 255) throw Error(ErrorCode::InvalidConfig, "max_bins must be in 2..255");
    BinMapper mapper;
    mapper.upper_edges.resize(matrix.cols());
    std::vector<double> values;
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
        values.clear();
        for (std::size_t r = 0; r < matrix.rows(); ++r) {
            const float v = matrix.at(r, c);
            if (!std::isnan(v)) values.push_back(static_cast<double>(v));
        }
        std::sort(values.begin(), values.end());
        std::vector<double> distinct = values;
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        auto& edges = mapper.upper_edges[c];
        const auto midpoint_after = [&](double v) -> std::optional<double> {
            auto it = std::upper_bound(distinct.begin(), distinct.end(), v);
            if (it == distinct.end()) return std::nullopt;
            return v + (*it - v) / 2.0;
        };
        if (distinct.size() <= static_cast<std::size_t>(max_bins)) {
            for (std::size_t i = 0; i + 1 < distinct.size(); ++i) edges.push_back(*midpoint_after(distinct[i]));
        } else {
            const std::size_t n = values.size();
            const auto bins = static_cast<std::size_t>(max_bins);
            for (std::size_t k = 1; k < bins; ++k) {
                // Lower k/bins quantile; the edge sits halfway to the next value.
                const std::size_t rank = (k * n + bins - 1) / bins;
                const double q = values[rank == 0 ? 0 : rank - 1];
                auto edge = midpoint_after(q);
                if (edge && (edges.empty() || *edge > edges.back())) edges.push_back(*edge);
            }
        }
        edges.push_back(kInf);
    }
    return mapper;
}

// ============================================================================
// Config
// ============================================================================

void TrainConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
    if (rounds < 0) fail("rounds must be >= 0");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) fail("learning_rate must be in (0, 1]");
    if (max_leaves < 2) fail("max_leaves must be >= 2");
    if (!(min_child_weight >= 0.0)) fail("min_child_weight must be >= 0");
    if (!(l2_lambda >= 0.0)) fail("l2_lambda must be >= 0");
    if (!(goss_a >= 0.0 && goss_a <= 1.0 && goss_b >= 0.0 && goss_b <= 1.0)) fail("goss_a and goss_b must be in [0, 1]");
    if (goss_a + goss_b > 1.0 + 1e-12) fail("goss_a + goss_b must be <= 1");
    if (goss_a < 1.0 && goss_b <= 0.0) throw Error(ErrorCode::DegenerateSampling, "GOSS with a < 1 needs b > 0");
    if (max_bins < 2 || max_bins > 255) fail("max_bins must be in 2..255");
    if (early_stop_rounds && *early_stop_rounds < 1) fail("early_stop_rounds must be >= 1");
}

TrainConfig train_config_from_json(const Json& doc) {
    TrainConfig c;
    try {
        c.rounds = doc.value("rounds", c.rounds);
        c.learning_rate = doc.value("learning_rate", c.learning_rate);
        c.max_leaves = doc.value("max_leaves", c.max_leaves);
        c.min_child_weight = doc.value("min_child_weight", c.min_child_weight);
        c.l2_lambda = doc.value("l2_lambda", c.l2_lambda);
        if (doc.value("goss", false)) {
            c.goss_a = 0.2;
            c.goss_b = 0.1;
        }
        c.goss_a = doc.value("goss_a", c.goss_a);
        c.goss_b = doc.value("goss_b", c.goss_b);
        c.max_bins = doc.value("max_bins", c.max_bins);
        c.seed = doc.value("seed", c.seed);
        if (doc.contains("early_stop_rounds") && !doc["early_stop_rounds"].is_null()) {
            c.early_stop_rounds = doc["early_stop_rounds"].get<int>();
        }
        c.threads = doc.value("threads", c.threads);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("train config: ") + e.what());
    }
    c.validate();
    return c;
}

Json to_json(const TrainConfig& c) {
    Json doc;
    doc["rounds"] = c.rounds;
    doc["learning_rate"] = c.learning_rate;
    doc["max_leaves"] = c.max_leaves;
    doc["min_child_weight"] = c.min_child_weight;
    doc["l2_lambda"] = c.l2_lambda;
    doc["goss_a"] = c.goss_a;
    doc["goss_b"] = c.goss_b;
    doc["max_bins"] = c.max_bins;
    doc["seed"] = c.seed;
    doc["early_stop_rounds"] = c.early_stop_rounds ? Json(*c.early_stop_rounds) : Json(nullptr);
    return doc;
}

// ============================================================================
// Model serialization
// ============================================================================

Json model_to_json(const BoostedModel& model) {
    Json doc;
    doc["base_score"] = model.base_score;
    doc["learning_rate"] = model.learning_rate;
    doc["trees"] = Json::array();
    for (const auto& tree : model.trees) {
        Json nodes = Json::array();
        for (const auto& n : tree.nodes) {
            Json j;
            if (n.is_leaf) {
                j["leaf"] = n.leaf_value;
            } else {
                j["column"] = model.feature_names[static_cast<std::size_t>(n.feature)];
                j["bin"] = n.threshold_bin;
                j["threshold"] = n.threshold; // +inf serializes as null
                j["missing_left"] = n.missing_left;
                j["gain"] = n.gain;
                j["left"] = n.left;
                j["right"] = n.right;
            }
            nodes.push_back(std::move(j));
        }
        Json t;
        t["nodes"] = std::move(nodes);
        doc["trees"].push_back(std::move(t));
    }
    doc["split_records"] = Json::array();
    for (const auto& rec : model.split_records) doc["split_records"].push_back(Json::array({rec.column, rec.gain}));
    doc["feature_names"] = model.feature_names;
    return doc;
}

BoostedModel model_from_json(const Json& doc) {
    BoostedModel model;
    try {
        model.base_score = doc.at("base_score").get<double>();
        model.learning_rate = doc.at("learning_rate").get<double>();
        model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
        std::unordered_map<std::string, int> index;
        for (std::size_t i = 0; i < model.feature_names.size(); ++i) index[model.feature_names[i]] = static_cast<int>(i);
        for (const auto& t : doc.at("trees")) {
            Tree tree;
            for (const auto& j : t.at("nodes")) {
                TreeNode n;
                if (j.contains("leaf")) {
                    n.leaf_value = j["leaf"].get<double>();
                } else {
                    n.is_leaf = false;
                    const auto name = j.at("column").get<std::string>();
                    auto it = index.find(name);
                    if (it == index.end()) throw Error(ErrorCode::InvalidData, "model splits on unknown column " + name);
                    n.feature = it->second;
                    n.threshold_bin = j.at("bin").get<int>();
                    n.threshold = j.at("threshold").is_null() ? kInf : j["threshold"].get<double>();
                    n.missing_left = j.at("missing_left").get<bool>();
                    n.gain = j.at("gain").get<double>();
                    n.left = j.at("left").get<int>();
                    n.right = j.at("right").get<int>();
                }
                tree.nodes.push_back(n);
            }
            for (const auto& n : tree.nodes) {
                const auto size = static_cast<int>(tree.nodes.size());
                if (!n.is_leaf && (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size)) {
                    throw Error(ErrorCode::InvalidData, "model tree has a dangling child index");
                }
            }
            if (tree.nodes.empty()) throw Error(ErrorCode::InvalidData, "model tree has no nodes");
            model.trees.push_back(std::move(tree));
        }
        for (const auto& rec : doc.at("split_records")) {
            model.split_records.push_back({rec.at(0).get<std::string>(), rec.at(1).get<double>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidData, std::string("model document: ") + e.what());
    }
    return model;
}

void save_model(const std::filesystem::path& path, const BoostedModel& model) {
    write_file(path, dump_json(model_to_json(model)));
}

BoostedModel load_model(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    try {
        return model_from_json(Json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidData, path.string() + ": " + e.what());
    }
}

// ============================================================================
// Training primitives
// ============================================================================

double sigmoid(double score) {
    if (score >= 0.0) return 1.0 / (1.0 + std::exp(-score));
    const double e = std::exp(score);
    return e / (1.0 + e);
}

std::vector<GradientPair> logistic_grad_hess(std::span<const int> labels, std::span<const double> scores) {
    if (labels.size() != scores.size()) throw Error(ErrorCode::LengthMismatch, "labels and scores differ in length");
    std::vector<GradientPair> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double p = sigmoid(scores[i]);
        out[i].g = p - static_cast<double>(labels[i]);
        out[i].h = p * (1.0 - p);
    }
    return out;
}

GossSample goss_sample(std::span<const GradientPair> grads, double a, double b, std::uint64_t seed) {
    if (!(a >= 0.0 && b >= 0.0 && a <= 1.0 && b <= 1.0) || a + b > 1.0 + 1e-12) {
        throw Error(ErrorCode::InvalidConfig, "GOSS fractions need 0 <= a, 0 <= b, a + b <= 1");
    }
    const std::size_t n = grads.size();
    GossSample out;
    if (a >= 1.0) {
        out.rows.resize(n);
        std::iota(out.rows.begin(), out.rows.end(), std::size_t{0});
        out.multipliers.assign(n, 1.0);
        return out;
    }
    if (b <= 0.0) throw Error(ErrorCode::DegenerateSampling, "GOSS with a < 1 needs b > 0");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return std::fabs(grads[x].g) > std::fabs(grads[y].g); });
    const std::size_t top = ceil_fraction(a, n);
    std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(top), order.end());
    std::sort(rest.begin(), rest.end());
    const std::size_t draw = std::min(rest.size(), ceil_fraction(b, n));

    // Partial Fisher-Yates over the remainder.
    Rng rng(seed);
    for (std::size_t i = 0; i < draw; ++i) {
        const std::size_t j = i + rng.index(rest.size() - i);
        std::swap(rest[i], rest[j]);
    }
    const double amplify = (1.0 - a) / b;
    std::vector<std::pair<std::size_t, double>> picked;
    picked.reserve(top + draw);
    for (std::size_t i = 0; i < top; ++i) picked.emplace_back(order[i], 1.0);
    for (std::size_t i = 0; i < draw; ++i) picked.emplace_back(rest[i], amplify);
    std::sort(picked.begin(), picked.end());
    for (const auto& [row, mult] : picked) {
        out.rows.push_back(row);
        out.multipliers.push_back(mult);
    }
    return out;
}

// ============================================================================
// train / predict
// ============================================================================

BoostedModel train(const FeatureMatrix& matrix, std::span<const int> labels, const TrainConfig& config,
                   const std::optional<Holdout>& valid) {
    config.validate();
    if (matrix.rows() == 0 || matrix.cols() == 0) throw Error(ErrorCode::EmptyMatrix, "training matrix is empty");
    if (labels.size() != matrix.rows()) {
        throw Error(ErrorCode::LengthMismatch, std::to_string(labels.size()) + " labels for " +
                                                   std::to_string(matrix.rows()) + " rows");
    }
    std::size_t positives = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw Error(ErrorCode::InvalidData, "labels must be 0 or 1");
        positives += static_cast<std::size_t>(y);
    }
    if (matrix.rows() < 2 || positives == 0 || positives == matrix.rows()) {
        throw Error(ErrorCode::SingleClass, "training labels need both classes");
    }

    const std::size_t n = matrix.rows();
    const double mean = static_cast<double>(positives) / static_cast<double>(n);

    BoostedModel model;
    model.base_score = std::log(mean / (1.0 - mean));
    model.learning_rate = config.learning_rate;
    model.feature_names = matrix.column_names;

    const BinMapper mapper = build_bins(matrix, config.max_bins);
    const BinnedData binned = bin_matrix(matrix, mapper, config.threads);

    std::vector<double> scores(n, model.base_score);
    std::vector<double> valid_scores;
    std::optional<BinnedData> valid_binned;
    const bool monitor = valid.has_value() && config.early_stop_rounds.has_value();
    if (monitor) {
        // Same bin edges as training, resolved by column name.
        const FeatureMatrix aligned = valid->matrix.select_columns(matrix.column_names);
        valid_binned = bin_matrix(aligned, mapper, config.threads);
        valid_scores.assign(aligned.rows(), model.base_score);
    }
    double best_metric = -kInf;
    std::size_t best_trees = 0;

    std::vector<double> g(n, 0.0);
    std::vector<double> h(n, 0.0);
    for (int round = 0; round < config.rounds; ++round) {
        const auto grads = logistic_grad_hess(labels, scores);
        const GossSample sample = goss_sample(grads, config.goss_a, config.goss_b,
                                              config.seed + static_cast<std::uint64_t>(round) * 0x9E3779B97F4A7C15ull);
        std::vector<std::uint32_t> rows;
        rows.reserve(sample.rows.size());
        for (std::size_t i = 0; i < sample.rows.size(); ++i) {
            const std::size_t r = sample.rows[i];
            g[r] = grads[r].g * sample.multipliers[i];
            h[r] = grads[r].h * sample.multipliers[i];
            rows.push_back(static_cast<std::uint32_t>(r));
        }

        TreeGrower grower(binned, mapper, config, g, h);
        Tree tree = grower.grow(std::move(rows));
        for (std::size_t r = 0; r < n; ++r) scores[r] += route_binned(tree, binned, mapper, r);
        model.trees.push_back(std::move(tree));

        if (monitor) {
            for (std::size_t r = 0; r < valid_scores.size(); ++r) {
                valid_scores[r] += route_binned(model.trees.back(), *valid_binned, mapper, r);
            }
            const double m = amex_metric(valid->labels, valid_scores).M;
            if (m > best_metric) {
                best_metric = m;
                best_trees = model.trees.size();
            } else if (static_cast<int>(model.trees.size() - best_trees) >= *config.early_stop_rounds) {
                break;
            }
        }
    }
    if (monitor) model.trees.resize(best_trees);
    rebuild_split_records(model);
    return model;
}

std::vector<double> predict_raw(const BoostedModel& model, const FeatureMatrix& matrix,
                                std::optional<std::size_t> tree_limit) {
    // Resolve only the columns the model actually splits on.
    std::vector<std::ptrdiff_t> column_of(model.feature_names.size(), -1);
    for (const auto& tree : model.trees) {
        for (const auto& node : tree.nodes) {
            if (node.is_leaf) continue;
            const auto f = static_cast<std::size_t>(node.feature);
            if (column_of[f] >= 0) continue;
            auto c = matrix.column_index(model.feature_names[f]);
            if (!c) throw Error(ErrorCode::MissingFeatureColumn, "matrix lacks column '" + model.feature_names[f] + "'");
            column_of[f] = static_cast<std::ptrdiff_t>(*c);
        }
    }
    const std::size_t limit = std::min(model.trees.size(), tree_limit.value_or(model.trees.size()));
    std::vector<double> out(matrix.rows(), model.base_score);
    for (std::size_t t = 0; t < limit; ++t) {
        const Tree& tree = model.trees[t];
        for (std::size_t r = 0; r < matrix.rows(); ++r) {
            std::size_t id = 0;
            while (!tree.nodes[id].is_leaf) {
                const TreeNode& node = tree.nodes[id];
                const float v = matrix.at(r, static_cast<std::size_t>(column_of[static_cast<std::size_t>(node.feature)]));
                const bool left = std::isnan(v) ? node.missing_left : static_cast<double>(v) <= node.threshold;
                id = static_cast<std::size_t>(left ? node.left : node.right);
            }
            out[r] += tree.nodes[id].leaf_value;
        }
    }
    return out;
}

std::vector<double> predict(const BoostedModel& model, const FeatureMatrix& matrix, std::optional<std::size_t> tree_limit) {
    auto out = predict_raw(model, matrix, tree_limit);
    for (double& v : out) v = sigmoid(v);
    return out;
}

// ============================================================================
// Importance
// ============================================================================

ImportanceKind importance_kind_from(const std::string& s) {
    if (s == "total_gain") return ImportanceKind::TotalGain;
    if (s == "average_gain") return ImportanceKind::AverageGain;
    throw Error(ErrorCode::InvalidConfig, "unknown importance kind '" + s + "'");
}

std::string_view to_string(ImportanceKind kind) {
    return kind == ImportanceKind::TotalGain ? "total_gain" : "average_gain";
}

std::map<std::string, double> importance(const BoostedModel& model, ImportanceKind kind) {
    std::map<std::string, double> total;
    std::map<std::string, std::size_t> count;
    for (const auto& rec : model.split_records) {
        total[rec.column] += rec.gain;
        ++count[rec.column];
    }
    if (kind == ImportanceKind::AverageGain) {
        for (auto& [name, v] : total) v /= static_cast<double>(count[name]);
    }
    return total;
}

std::map<std::string, double> normalize_importance(const std::map<std::string, double>& values) {
    double sum = 0.0;
    for (const auto& [name, v] : values) sum += v;
    std::map<std::string, double> out;
    if (sum <= 0.0) return out;
    for (const auto& [name, v] : values) out[name] = v / sum;
    return out;
}

} // namespace credit
