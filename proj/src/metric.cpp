#include "credit/metric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "credit/error.hpp"

namespace credit {

namespace {

void check_inputs(std::span<const int> labels, std::span<const double> preds) {
    if (labels.size() != preds.size()) {
        throw Error(ErrorCode::LengthMismatch, std::to_string(labels.size()) + " labels vs " +
                                                   std::to_string(preds.size()) + " predictions");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            throw Error(ErrorCode::InvalidData, "label at row " + std::to_string(i) + " is not binary");
        }
        if (std::isnan(preds[i])) throw Error(ErrorCode::InvalidData, "prediction at row " + std::to_string(i) + " is NaN");
    }
}

// Row order: prediction descending, then row index ascending.
std::vector<std::size_t> rank_order(std::span<const double> preds) {
    std::vector<std::size_t> idx(preds.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return preds[a] > preds[b]; });
    return idx;
}

} // namespace

Json to_json(const MetricReport& r) {
    Json doc;
    doc["G"] = r.G;
    doc["D"] = r.D;
    doc["M"] = r.M;
    doc["auc_w"] = r.auc_w;
    doc["n_rows"] = r.n_rows;
    doc["n_pos"] = r.n_pos;
    doc["total_weight"] = r.total_weight;
    return doc;
}

double weight_of(int label, const MetricOptions& opt) { return label == 0 ? opt.negative_weight : 1.0; }

double weighted_auc(std::span<const int> labels, std::span<const double> preds, const MetricOptions& opt) {
    check_inputs(labels, preds);
    const auto order = rank_order(preds);

    // Walk tie groups from the lowest prediction upward; each positive in a
    // group beats all negative weight below it and ties with the group's own.
    double w_pos = 0.0;
    double w_neg = 0.0;
    double neg_below = 0.0;
    double numerator = 0.0;
    std::size_t end = order.size();
    while (end > 0) {
        std::size_t begin = end - 1;
        while (begin > 0 && preds[order[begin - 1]] == preds[order[end - 1]]) --begin;
        double g_pos = 0.0;
        double g_neg = 0.0;
        for (std::size_t k = begin; k < end; ++k) {
            if (labels[order[k]] == 1) {
                g_pos += 1.0;
            } else {
                g_neg += opt.negative_weight;
            }
        }
        numerator += g_pos * neg_below + 0.5 * g_pos * g_neg;
        neg_below += g_neg;
        w_pos += g_pos;
        w_neg += g_neg;
        end = begin;
    }
    if (w_pos == 0.0 || w_neg == 0.0) throw Error(ErrorCode::SingleClass, "weighted AUC needs both classes");
    return numerator / (w_pos * w_neg);
}

double normalized_weighted_gini(std::span<const int> labels, std::span<const double> preds, const MetricOptions& opt) {
    return 2.0 * weighted_auc(labels, preds, opt) - 1.0;
}

double default_rate_at_4pct(std::span<const int> labels, std::span<const double> preds, const MetricOptions& opt) {
    check_inputs(labels, preds);
    double total_weight = 0.0;
    std::size_t positives = 0;
    for (int y : labels) {
        total_weight += weight_of(y, opt);
        positives += y == 1 ? 1 : 0;
    }
    if (positives == 0) throw Error(ErrorCode::NoPositives, "capture rate needs at least one positive");
    const double cutoff = opt.capture_fraction * total_weight;
    double running = 0.0;
    std::size_t captured = 0;
    for (std::size_t i : rank_order(preds)) {
        running += weight_of(labels[i], opt);
        if (running > cutoff) break;
        captured += labels[i] == 1 ? 1 : 0;
    }
    return static_cast<double>(captured) / static_cast<double>(positives);
}

MetricReport amex_metric(std::span<const int> labels, std::span<const double> preds, const MetricOptions& opt) {
    MetricReport r;
    r.auc_w = weighted_auc(labels, preds, opt);
    r.G = 2.0 * r.auc_w - 1.0;
    r.D = default_rate_at_4pct(labels, preds, opt);
    r.M = 0.5 * (r.G + r.D);
    r.n_rows = labels.size();
    for (int y : labels) {
        r.n_pos += y == 1 ? 1 : 0;
        r.total_weight += weight_of(y, opt);
    }
    return r;
}

} // namespace credit
