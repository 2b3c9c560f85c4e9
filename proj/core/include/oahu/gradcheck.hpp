#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "oahu/model.hpp"
#include "oahu/trainer.hpp"

namespace oahu {

struct GradCheckOptions {
    ModelConfig config;          // only the shape fields and tau are used
    std::size_t trials = 10;
    std::uint64_t seed = 1;
    double epsilon = 1e-5;
    double tolerance = 1e-4;
    // Relative error is |a - n| / max(|a|, |n|, magnitude_floor).
    double magnitude_floor = 1e-8;
    // Test hook: perturbs the analytic gradient so the harness must fail.
    bool corrupt_analytic = false;
};

struct GradCheckReport {
    std::size_t trials = 0;
    std::size_t entries_checked = 0;
    double max_relative_error = 0.0;
    std::string worst_entry;  // e.g. "trial 3 W^(2)[4,1]"
    bool passed = true;
};

/// Size ceilings for the command-line harness: d <= 16, L <= 4,
/// hidden <= 16, embedding <= 8. Throws ConfigError otherwise.
void check_gradcheck_limits(const ModelConfig& config);

/// Overall loss at `params` with every depth's bounds fixed to those in `frozen`.
double overall_loss_frozen(const ParameterSet& params, const TripletFeatures& triplet,
                           const TripletLossReport& frozen);

/// Compares backward() against central differences of the overall loss on
/// random models and random triplets.
GradCheckReport gradient_check(const GradCheckOptions& options);

}  // namespace oahu
