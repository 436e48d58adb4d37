#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "credit/util.hpp"

namespace credit {

struct EnsembleSpec {
    std::vector<std::string> member_names;
    std::vector<double> weights;

    /// Unique names, matching lengths; when `convex`, non-negative weights
    /// summing to 1 within 1e-12. Throws InvalidWeights.
    void validate(bool convex = true) const;
};

Json to_json(const EnsembleSpec& spec);
EnsembleSpec ensemble_spec_from_json(const Json& doc);

/// Weighted sum of member predictions. With `convex` set the weights must
/// form a probability vector and each output is kept inside the members'
/// [min, max] for that row; otherwise any finite weights are accepted.
std::vector<double> blend(std::span<const std::vector<double>> predictions, std::span<const double> weights,
                          bool convex = true);

struct BlendSearchOptions {
    double step = 0.01;
    /// Grids up to this many points are enumerated exhaustively; larger
    /// ones fall back to coordinate ascent from the best vertex.
    std::size_t exhaustive_limit = 250'000;
    int threads = 1;
};

struct BlendResult {
    EnsembleSpec spec;
    double M = 0.0;
    std::size_t evaluations = 0;
};

/// Maximizes the composite metric M over the simplex grid with the given
/// resolution. Ties keep the weight vector that is largest in
/// lexicographic order, so earlier members win ((1, 0) over (0, 1)).
BlendResult optimize_weights(std::span<const std::vector<double>> predictions, std::span<const int> labels,
                             std::span<const std::string> names = {}, const BlendSearchOptions& options = {});

} // namespace credit
