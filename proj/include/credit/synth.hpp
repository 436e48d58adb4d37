#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "credit/ingest.hpp"
#include "credit/util.hpp"

namespace credit {

/// Seeded stand-in for the statement-level competition data: customers with
/// 1..13 monthly statements, continuous columns c_<i>, categorical columns
/// k_<j>, a logistic default process driven by the signal columns, and
/// negative subsampling.
struct SynthConfig {
    std::size_t n_customers = 5000; // after subsampling
    double frac_full = 0.8;         // share with all 13 statements
    std::size_t n_continuous = 12;
    std::size_t n_categorical = 2;
    std::vector<std::size_t> signal_features = {0, 1, 2}; // continuous indices
    double noise_amplitude = 0.004;                        // uniform +/- on continuous cells
    double neg_keep_rate = 0.05;
    std::uint64_t seed = 0;

    double signal_strength = 4.0; // logistic slope on the signal mean
    double intercept = -6.0;
    double statement_noise = 0.5; // per-statement spread around a customer level
    double missing_rate = 0.02;
    /// Label = 1 exactly when the signal mean exceeds `separable_threshold`.
    bool separable = false;
    double separable_threshold = 1.0;

    void validate() const;
};

SynthConfig synth_config_from_json(const Json& doc);
Json to_json(const SynthConfig& config);

struct SynthData {
    StatementTable table;      // double-valued continuous cells, int32 codes
    std::vector<std::string> customers;
    std::vector<int> labels;   // aligned with customers
    std::size_t generated = 0; // customers drawn before subsampling
    std::size_t positives_generated = 0;
};

/// Throws NoSignal when signal_features is empty.
SynthData generate(const SynthConfig& config);

Schema synth_schema(const SynthConfig& config);

std::string labels_to_csv(const std::vector<std::string>& customers, const std::vector<int>& labels);

} // namespace credit
