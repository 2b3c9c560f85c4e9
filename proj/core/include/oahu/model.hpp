#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace oahu {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Embeddings whose pre-normalization norm falls below this are flagged
// degenerate and replaced by a fixed unit vector.
inline constexpr double kNormFloor = 1e-12;

/// Hyper-parameters of the over-complete network and of the online learner.
///
/// Defaults are the reference settings (beta=0.99, L=5, 100 hidden units,
/// s=0.1, eta=0.3, 50-dimensional embeddings, tau=0.1). The input width has
/// no sensible default and must be set by the caller.
struct ModelConfig {
    std::uint32_t input_dim = 0;
    std::uint32_t hidden_layers = 5;
    std::uint32_t hidden_units = 100;
    std::uint32_t embedding_dim = 50;
    double tau = 0.1;
    double beta = 0.99;
    double smoothing = 0.1;
    double learning_rate = 0.3;
    std::uint64_t rng_seed = 0;

    std::size_t num_models() const noexcept { return std::size_t{hidden_layers} + 1; }

    /// Throws ConfigError naming the first offending field.
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

/// Trainable state. `hidden[l-1]` is W^(l) (rows = hidden_units), `heads[l]`
/// is Theta^(l) (rows = width of h^(l), cols = embedding_dim) and `alpha[l]`
/// the hedge weight of the depth-l metric model.
struct ParameterSet {
    std::vector<Matrix> hidden;
    std::vector<Matrix> heads;
    std::vector<double> alpha;

    std::size_t depth() const noexcept { return hidden.size(); }
    std::size_t num_models() const noexcept { return heads.size(); }
    std::size_t input_dim() const noexcept { return heads.empty() ? 0 : heads.front().rows(); }
    std::size_t embedding_dim() const noexcept { return heads.empty() ? 0 : heads.front().cols(); }

    /// Checks shape consistency against `config` and the alpha simplex.
    void check_against(const ModelConfig& config) const;

    /// Stable 64-bit hash of every matrix entry and alpha (bitwise).
    std::uint64_t fingerprint() const;

    bool operator==(const ParameterSet& other) const;
};

/// Everything the backward pass needs for one input.
struct ForwardTrace {
    std::vector<Vector> activations;     // h^(0..L); h^(0) is the input
    std::vector<Vector> preactivations;  // z^(1..L), stored at [l-1]
    std::vector<Vector> raw_embeddings;  // g^(0..L)
    std::vector<Vector> embeddings;      // f^(0..L), unit norm
    std::vector<double> raw_norms;       // ||g^(l)||
    std::vector<bool> degenerate;        // ||g^(l)|| < kNormFloor

    std::size_t num_models() const noexcept { return embeddings.size(); }
};

ParameterSet init_model(const ModelConfig& config);

ForwardTrace forward(const ParameterSet& params, std::span<const double> x);
ForwardTrace forward(const ParameterSet& params, const Vector& x);

/// Unit-norm embeddings only; cheaper than a full trace for deployment.
std::vector<Vector> embed(const ParameterSet& params, std::span<const double> x);

/// Total number of stored scalars (matrices plus alpha).
std::size_t parameter_count(const ModelConfig& config);

/// Asymptotic space estimate d*S_emb + L*S_hidden*(d+S_emb) + L(L-1)/2*S_hidden^2.
std::size_t space_complexity_estimate(const ModelConfig& config);

}  // namespace oahu
