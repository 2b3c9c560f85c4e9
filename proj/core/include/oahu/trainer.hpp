#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "oahu/abtl.hpp"
#include "oahu/model.hpp"

namespace oahu {

struct HedgeResult {
    std::vector<double> alpha;               // floored and normalized
    std::vector<double> pre_normalization;   // after the multiplicative update and the floor
    std::vector<bool> exponential_branch;    // per depth, which update rule fired
};

/// Multiplicative-weights update of the model weights.
///
/// Per depth: alpha * beta^loss when beta^{min loss} * ln(loss) > beta - 1,
/// otherwise alpha * (1 - (1 - beta) * loss). A zero loss always takes the
/// linear rule. Each entry is then floored at s / (L + 1) and the vector is
/// renormalized.
HedgeResult hedge_update(std::span<const double> alpha, std::span<const double> local_losses,
                         double beta, double smoothing);

/// Gradients of the overall loss, shaped like ParameterSet::hidden / ::heads.
struct Gradients {
    std::vector<Matrix> hidden;
    std::vector<Matrix> heads;
};

/// Backpropagates the alpha-weighted local losses through the unit-norm
/// normalization, the embedding heads and the shared ReLU stack.
/// Head l only sees depth-l terms; W^(l) collects terms from every depth >= l.
Gradients backward(const ParameterSet& params, const TripletTraces& traces,
                   const TripletLossReport& report);

struct TripletFeatures {
    std::span<const double> anchor;
    std::span<const double> positive;
    std::span<const double> negative;
};

struct StepReport {
    TripletLossReport loss;
    std::vector<double> alpha_before;
    std::vector<double> alpha_pre_normalization;
    std::vector<double> alpha_after;
    std::vector<double> hidden_grad_norms;
    std::vector<double> head_grad_norms;
    std::vector<bool> exponential_branch;
};

/// One online round. All gradients and hedge inputs come from the pre-step
/// parameters; then heads, hidden matrices and alpha are updated in that order.
/// On a dimension error the parameters are left untouched.
StepReport train_step(ParameterSet& params, const TripletFeatures& triplet, const ModelConfig& config);

class TrainingLog {
public:
    static constexpr std::size_t kWindow = 100;

    void record(const StepReport& step, double wall_seconds);

    std::size_t steps() const noexcept { return losses_.size(); }
    std::size_t contributed() const noexcept { return contributed_; }
    const std::vector<double>& losses() const noexcept { return losses_; }
    const std::vector<double>& wall_seconds() const noexcept { return wall_seconds_; }

    /// Mean overall loss over the last min(steps, 100) steps.
    double running_mean() const;
    /// Mean overall loss over the first min(steps, 100) steps.
    double initial_mean() const;
    double utilization() const;

private:
    std::vector<double> losses_;
    std::vector<double> wall_seconds_;
    std::size_t contributed_ = 0;
};

using StepObserver = std::function<void(std::size_t step_index, const StepReport&)>;

/// Single pass over the stream in order. Throws ArgumentError on an empty
/// stream and rethrows step failures with the offending index.
TrainingLog train_stream(ParameterSet& params, std::span<const TripletFeatures> stream,
                         const ModelConfig& config, const StepObserver& observer = {});

}  // namespace oahu
