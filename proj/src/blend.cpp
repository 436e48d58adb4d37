#include "credit/blend.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "credit/error.hpp"
#include "credit/metric.hpp"

namespace credit {

namespace {

// Number of compositions of `units` into `parts` non-negative integers,
// saturating at `cap`.
std::size_t grid_size(std::size_t units, std::size_t parts, std::size_t cap) {
    // C(units + parts - 1, parts - 1), computed incrementally.
    double count = 1.0;
    for (std::size_t i = 1; i < parts; ++i) {
        count = count * static_cast<double>(units + i) / static_cast<double>(i);
        if (count > static_cast<double>(cap)) return cap + 1;
    }
    return static_cast<std::size_t>(std::llround(count));
}

// Visits all compositions with the first coordinate descending, then the
// second, and so on: lexicographically largest first.
void enumerate(std::vector<int>& units, std::size_t pos, int remaining, std::vector<std::vector<int>>& out) {
    if (pos + 1 == units.size()) {
        units[pos] = remaining;
        out.push_back(units);
        return;
    }
    for (int u = remaining; u >= 0; --u) {
        units[pos] = u;
        enumerate(units, pos + 1, remaining - u, out);
    }
}

} // namespace

void EnsembleSpec::validate(bool convex) const {
    if (member_names.size() != weights.size()) {
        throw Error(ErrorCode::InvalidWeights, std::to_string(member_names.size()) + " names for " +
                                                   std::to_string(weights.size()) + " weights");
    }
    std::set<std::string> seen(member_names.begin(), member_names.end());
    if (seen.size() != member_names.size()) throw Error(ErrorCode::InvalidWeights, "member names must be unique");
    double sum = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || (convex && w < 0.0)) throw Error(ErrorCode::InvalidWeights, "weight out of range");
        sum += w;
    }
    if (convex && std::fabs(sum - 1.0) > 1e-12) {
        throw Error(ErrorCode::InvalidWeights, "weights sum to " + format_g17(sum) + ", not 1");
    }
}

Json to_json(const EnsembleSpec& spec) {
    Json doc;
    doc["members"] = spec.member_names;
    doc["weights"] = spec.weights;
    return doc;
}

EnsembleSpec ensemble_spec_from_json(const Json& doc) {
    EnsembleSpec spec;
    try {
        spec.member_names = doc.at("members").get<std::vector<std::string>>();
        spec.weights = doc.at("weights").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("ensemble spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

std::vector<double> blend(std::span<const std::vector<double>> predictions, std::span<const double> weights,
                          bool convex) {
    if (predictions.size() != weights.size() || predictions.empty()) {
        throw Error(ErrorCode::InvalidWeights, std::to_string(weights.size()) + " weights for " +
                                                   std::to_string(predictions.size()) + " members");
    }
    const std::size_t n = predictions.front().size();
    for (const auto& p : predictions) {
        if (p.size() != n) throw Error(ErrorCode::LengthMismatch, "member prediction vectors differ in length");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || (convex && w < 0.0)) throw Error(ErrorCode::InvalidWeights, "weight out of range");
        sum += w;
    }
    if (convex && std::fabs(sum - 1.0) > 1e-12) {
        throw Error(ErrorCode::InvalidWeights, "weights sum to " + format_g17(sum) + ", not 1");
    }

    std::vector<double> out(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        double lo = predictions[0][j];
        double hi = predictions[0][j];
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            const double v = predictions[i][j];
            if (weights[i] != 0.0) acc += weights[i] * v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        out[j] = convex ? std::clamp(acc, lo, hi) : acc;
    }
    return out;
}

BlendResult optimize_weights(std::span<const std::vector<double>> predictions, std::span<const int> labels,
                             std::span<const std::string> names, const BlendSearchOptions& options) {
    const std::size_t m = predictions.size();
    if (m < 2) throw Error(ErrorCode::SingleMember, "weight search needs at least two members");
    if (!names.empty() && names.size() != m) throw Error(ErrorCode::InvalidWeights, "one name per member required");
    if (!(options.step > 0.0 && options.step <= 1.0)) throw Error(ErrorCode::InvalidConfig, "blend step must be in (0, 1]");
    const double inv = 1.0 / options.step;
    const int units = static_cast<int>(std::llround(inv));
    if (std::fabs(inv - units) > 1e-6 * inv) {
        throw Error(ErrorCode::InvalidConfig, "blend step must divide 1 evenly");
    }
    for (const auto& p : predictions) {
        if (p.size() != labels.size()) throw Error(ErrorCode::LengthMismatch, "member prediction length != label count");
    }

    const auto weights_of = [&](const std::vector<int>& u) {
        std::vector<double> w(m);
        for (std::size_t i = 0; i < m; ++i) w[i] = static_cast<double>(u[i]) / units;
        return w;
    };
    const auto score = [&](const std::vector<int>& u) {
        const auto w = weights_of(u);
        return amex_metric(labels, blend(predictions, w)).M;
    };

    BlendResult result;
    std::vector<int> best_units;
    double best = -std::numeric_limits<double>::infinity();

    if (grid_size(static_cast<std::size_t>(units), m, options.exhaustive_limit) <= options.exhaustive_limit) {
        std::vector<std::vector<int>> grid;
        std::vector<int> scratch(m, 0);
        enumerate(scratch, 0, units, grid);
        std::vector<double> scores(grid.size());
        parallel_for(grid.size(), options.threads, [&](std::size_t i) { scores[i] = score(grid[i]); });
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (scores[i] > best) {
                best = scores[i];
                best_units = grid[i];
            }
        }
        result.evaluations = grid.size();
    } else {
        // Start at the best vertex, then repeatedly apply the single
        // transfer of weight between two members that raises M the most.
        for (std::size_t i = 0; i < m; ++i) {
            std::vector<int> u(m, 0);
            u[i] = units;
            const double s = score(u);
            ++result.evaluations;
            if (s > best) {
                best = s;
                best_units = u;
            }
        }
        for (bool improved = true; improved;) {
            improved = false;
            std::vector<int> step_best = best_units;
            double step_score = best;
            for (std::size_t to = 0; to < m; ++to) {
                for (std::size_t from = 0; from < m; ++from) {
                    if (to == from) continue;
                    for (int d = 1; d <= best_units[from]; ++d) {
                        std::vector<int> u = best_units;
                        u[from] -= d;
                        u[to] += d;
                        const double s = score(u);
                        ++result.evaluations;
                        if (s > step_score || (s == step_score && u > step_best && s > best)) {
                            step_score = s;
                            step_best = u;
                        }
                    }
                }
            }
            if (step_score > best) {
                best = step_score;
                best_units = step_best;
                improved = true;
            }
        }
    }

    result.M = best;
    result.spec.weights = weights_of(best_units);
    if (names.empty()) {
        for (std::size_t i = 0; i < m; ++i) result.spec.member_names.push_back("member_" + std::to_string(i));
    } else {
        result.spec.member_names.assign(names.begin(), names.end());
    }
    return result;
}

} // namespace credit
