#include "oahu/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "oahu/errors.hpp"

namespace oahu {

HedgeResult hedge_update(std::span<const double> alpha, std::span<const double> local_losses,
                         double beta, double smoothing) {
    if (alpha.size() != local_losses.size() || alpha.empty())
        throw ContractError("hedge_update: alpha and losses differ in length");
    if (!(beta > 0.0 && beta < 1.0)) throw ContractError("hedge_update: beta must lie in (0, 1)");
    if (!(smoothing > 0.0 && smoothing < 1.0)) throw ContractError("hedge_update: s must lie in (0, 1)");
    for (double loss : local_losses)
        if (!(loss >= 0.0 && loss <= 1.0)) throw ContractError("hedge_update: loss outside [0, 1]");

    const std::size_t models = alpha.size();
    const double min_loss = *std::min_element(local_losses.begin(), local_losses.end());
    const double discount = std::pow(beta, min_loss);
    const double floor = smoothing / static_cast<double>(models);

    HedgeResult out;
    out.pre_normalization.resize(models);
    out.exponential_branch.resize(models);
    for (std::size_t l = 0; l < models; ++l) {
        const double loss = local_losses[l];
        // log(0) = -inf never exceeds beta - 1, so zero loss falls to the linear rule.
        const bool exponential = loss > 0.0 && discount * std::log(loss) > beta - 1.0;
        const double updated = exponential ? alpha[l] * std::pow(beta, loss)
                                           : alpha[l] * (1.0 - (1.0 - beta) * loss);
        out.exponential_branch[l] = exponential;
        out.pre_normalization[l] = std::max(updated, floor);
    }
    const double total = std::accumulate(out.pre_normalization.begin(), out.pre_normalization.end(), 0.0);
    out.alpha.resize(models);
    for (std::size_t l = 0; l < models; ++l) out.alpha[l] = out.pre_normalization[l] / total;
    return out;
}

namespace {

// Accumulates one role's contribution into `grads`.
void backprop_role(const ParameterSet& params, const ForwardTrace& trace,
                   const std::vector<Vector>& embedding_grads, Gradients& grads) {
    const std::size_t models = params.num_models();
    const std::size_t depth = params.depth();

    std::vector<Vector> activation_grads(models);
    for (std::size_t l = 0; l < models; ++l) {
        activation_grads[l] = Vector::Zero(trace.activations[l].size());
        if (trace.degenerate[l] || params.alpha[l] == 0.0) continue;
        const Vector& f = trace.embeddings[l];
        const Vector gf = params.alpha[l] * embedding_grads[l];
        // Jacobian of v -> v/||v|| is (I - f f^T) / ||v||.
        const Vector graw = (gf - f * f.dot(gf)) / trace.raw_norms[l];
        grads.heads[l].noalias() += trace.activations[l] * graw.transpose();
        if (l > 0) activation_grads[l].noalias() += params.heads[l] * graw;
    }
    for (std::size_t l = depth; l >= 1; --l) {
        const Vector& z = trace.preactivations[l - 1];
        const Vector dz = (z.array() > 0.0).select(activation_grads[l], 0.0);
        grads.hidden[l - 1].noalias() += dz * trace.activations[l - 1].transpose();
        if (l > 1) activation_grads[l - 1].noalias() += params.hidden[l - 1].transpose() * dz;
    }
}

}  // namespace

Gradients backward(const ParameterSet& params, const TripletTraces& traces,
                   const TripletLossReport& report) {
    if (report.depths.size() != params.num_models())
        throw ContractError("backward: loss report does not match the parameter set");
    for (const ForwardTrace* t : {&traces.anchor, &traces.positive, &traces.negative}) {
        if (t->num_models() != params.num_models() || t->preactivations.size() != params.depth() ||
            static_cast<std::size_t>(t->activations.front().size()) != params.input_dim())
            throw ContractError("backward: trace does not match the parameter set");
    }

    Gradients grads;
    grads.hidden.reserve(params.depth());
    for (const auto& w : params.hidden) grads.hidden.push_back(Matrix::Zero(w.rows(), w.cols()));
    grads.heads.reserve(params.num_models());
    for (const auto& t : params.heads) grads.heads.push_back(Matrix::Zero(t.rows(), t.cols()));

    const EmbeddingGradients eg = loss_gradient_wrt_embeddings(report, traces);
    backprop_role(params, traces.anchor, eg.anchor, grads);
    backprop_role(params, traces.positive, eg.positive, grads);
    backprop_role(params, traces.negative, eg.negative, grads);
    return grads;
}

StepReport train_step(ParameterSet& params, const TripletFeatures& triplet, const ModelConfig& config) {
    const std::size_t d = params.input_dim();
    if (triplet.anchor.size() != d || triplet.positive.size() != d || triplet.negative.size() != d)
        throw DimensionError("triplet feature length does not match model input width " + std::to_string(d));

    TripletTraces traces{forward(params, triplet.anchor), forward(params, triplet.positive),
                         forward(params, triplet.negative)};
    StepReport step;
    step.loss = triplet_loss(params, traces, config.tau);
    const Gradients grads = backward(params, traces, step.loss);
    const std::vector<double> losses = step.loss.local_losses();
    HedgeResult hedge = hedge_update(params.alpha, losses, config.beta, config.smoothing);

    step.alpha_before = params.alpha;
    const double eta = config.learning_rate;
    for (std::size_t l = 0; l < params.heads.size(); ++l) {
        params.heads[l].noalias() -= eta * grads.heads[l];
        step.head_grad_norms.push_back(grads.heads[l].norm());
    }
    for (std::size_t l = 0; l < params.hidden.size(); ++l) {
        params.hidden[l].noalias() -= eta * grads.hidden[l];
        step.hidden_grad_norms.push_back(grads.hidden[l].norm());
    }
    params.alpha = hedge.alpha;

    step.alpha_pre_normalization = std::move(hedge.pre_normalization);
    step.alpha_after = std::move(hedge.alpha);
    step.exponential_branch = std::move(hedge.exponential_branch);
    return step;
}

void TrainingLog::record(const StepReport& step, double wall_seconds) {
    losses_.push_back(step.loss.overall);
    wall_seconds_.push_back(wall_seconds);
    if (step.loss.contributed) ++contributed_;
}

double TrainingLog::running_mean() const {
    if (losses_.empty()) return 0.0;
    const std::size_t n = std::min(kWindow, losses_.size());
    return std::accumulate(losses_.end() - static_cast<std::ptrdiff_t>(n), losses_.end(), 0.0) /
           static_cast<double>(n);
}

double TrainingLog::initial_mean() const {
    if (losses_.empty()) return 0.0;
    const std::size_t n = std::min(kWindow, losses_.size());
    return std::accumulate(losses_.begin(), losses_.begin() + static_cast<std::ptrdiff_t>(n), 0.0) /
           static_cast<double>(n);
}

double TrainingLog::utilization() const {
    if (losses_.empty()) throw ArgumentError("utilization of an empty training log");
    return static_cast<double>(contributed_) / static_cast<double>(losses_.size());
}

TrainingLog train_stream(ParameterSet& params, std::span<const TripletFeatures> stream,
                         const ModelConfig& config, const StepObserver& observer) {
    if (stream.empty()) throw ArgumentError("train_stream: empty constraint stream");
    config.validate();
    params.check_against(config);

    TrainingLog log;
    for (std::size_t i = 0; i < stream.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        StepReport step;
        try {
            step = train_step(params, stream[i], config);
        } catch (const DimensionError& e) {
            throw DimensionError("constraint " + std::to_string(i) + ": " + e.what());
        } catch (const InputError& e) {
            throw InputError("constraint " + std::to_string(i) + ": " + e.what());
        }
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        log.record(step, elapsed.count());
        if (observer) observer(i, step);
    }
    return log;
}

}  // namespace oahu
