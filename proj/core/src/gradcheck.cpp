#include "oahu/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "oahu/errors.hpp"

namespace oahu {

void check_gradcheck_limits(const ModelConfig& c) {
    if (c.input_dim > 16) throw ConfigError("input_dim", "gradcheck allows at most 16");
    if (c.hidden_layers > 4) throw ConfigError("hidden_layers", "gradcheck allows at most 4");
    if (c.hidden_units > 16) throw ConfigError("hidden_units", "gradcheck allows at most 16");
    if (c.embedding_dim > 8) throw ConfigError("embedding_dim", "gradcheck allows at most 8");
}

double overall_loss_frozen(const ParameterSet& params, const TripletFeatures& triplet,
                           const TripletLossReport& frozen) {
    const auto a = forward(params, triplet.anchor).embeddings;
    const auto p = forward(params, triplet.positive).embeddings;
    const auto n = forward(params, triplet.negative).embeddings;
    double total = 0.0;
    for (std::size_t l = 0; l < params.num_models(); ++l) {
        const DepthLoss& r = frozen.depths[l];
        total += params.alpha[l] * local_loss_with_bounds((a[l] - p[l]).norm(), (a[l] - n[l]).norm(),
                                                          r.sim_bound, r.dis_bound);
    }
    return total;
}

namespace {

std::vector<double> random_input(std::size_t d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> x(d);
    for (auto& v : x) v = u(rng);
    return x;
}

}  // namespace

GradCheckReport gradient_check(const GradCheckOptions& options) {
    GradCheckReport report;
    report.trials = options.trials;
    std::mt19937_64 rng(options.seed);
    const double eps = options.epsilon;

    for (std::size_t trial = 0; trial < options.trials; ++trial) {
        ModelConfig config = options.config;
        config.rng_seed = rng();
        ParameterSet params = init_model(config);
        // Non-uniform weights so the per-depth alpha scaling is exercised.
        std::uniform_real_distribution<double> u(0.5, 1.5);
        double total = 0.0;
        for (auto& a : params.alpha) total += (a = u(rng));
        for (auto& a : params.alpha) a /= total;

        const auto xa = random_input(config.input_dim, rng);
        const auto xp = random_input(config.input_dim, rng);
        const auto xn = random_input(config.input_dim, rng);
        const TripletFeatures triplet{xa, xp, xn};

        const TripletTraces traces{forward(params, triplet.anchor), forward(params, triplet.positive),
                                   forward(params, triplet.negative)};
        const TripletLossReport loss = triplet_loss(params, traces, config.tau);
        Gradients analytic = backward(params, traces, loss);
        if (options.corrupt_analytic) {
            Matrix& m = analytic.heads.front();
            m(0, 0) = m(0, 0) * 1.5 + 1e-3;
        }

        auto check_matrix = [&](Matrix& param, const Matrix& grad, const std::string& name) {
            for (Eigen::Index i = 0; i < param.rows(); ++i) {
                for (Eigen::Index j = 0; j < param.cols(); ++j) {
                    const double saved = param(i, j);
                    param(i, j) = saved + eps;
                    const double plus = overall_loss_frozen(params, triplet, loss);
                    param(i, j) = saved - eps;
                    const double minus = overall_loss_frozen(params, triplet, loss);
                    param(i, j) = saved;
                    const double numeric = (plus - minus) / (2.0 * eps);
                    const double a = grad(i, j);
                    const double denom = std::max({std::abs(a), std::abs(numeric), options.magnitude_floor});
                    const double rel = std::abs(a - numeric) / denom;
                    ++report.entries_checked;
                    if (rel > report.max_relative_error) {
                        report.max_relative_error = rel;
                        report.worst_entry = "trial " + std::to_string(trial) + " " + name + "[" +
                                             std::to_string(i) + "," + std::to_string(j) + "]";
                    }
                }
            }
        };
        for (std::size_t l = 0; l < params.heads.size(); ++l)
            check_matrix(params.heads[l], analytic.heads[l], "Theta^(" + std::to_string(l) + ")");
        for (std::size_t l = 0; l < params.hidden.size(); ++l)
            check_matrix(params.hidden[l], analytic.hidden[l], "W^(" + std::to_string(l + 1) + ")");
    }
    report.passed = report.max_relative_error <= options.tolerance;
    return report;
}

}  // namespace oahu
