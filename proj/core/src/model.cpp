#include "oahu/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <random>
#include <string>

#include "oahu/errors.hpp"

namespace oahu {

void ModelConfig::validate() const {
    if (input_dim < 1) throw ConfigError("input_dim", "must be >= 1");
    if (hidden_units < 1) throw ConfigError("hidden_units", "must be >= 1");
    if (embedding_dim < 1) throw ConfigError("embedding_dim", "must be >= 1");
    if (!(tau > 0.0 && tau < 2.0 / 3.0)) throw ConfigError("tau", "must lie in (0, 2/3)");
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta", "must lie in (0, 1)");
    if (!(smoothing > 0.0 && smoothing < 1.0)) throw ConfigError("smoothing", "must lie in (0, 1)");
    // eta = 0 is accepted so the hedge can be exercised with frozen weights.
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw ConfigError("learning_rate", "must be finite and non-negative");
}

namespace {

void check_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const std::string& name) {
    if (m.rows() != rows || m.cols() != cols) {
        throw DimensionError(name + " has shape " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()) + ", expected " + std::to_string(rows) +
                             "x" + std::to_string(cols));
    }
}

Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    return m;
}

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t word) {
    for (int b = 0; b < 8; ++b) {
        h ^= (word >> (8 * b)) & 0xffu;
        h *= 1099511628211ull;
    }
    return h;
}

// v / ||v|| with the degenerate fallback to e_0.
void normalize_into(const Vector& g, Vector& f, double& norm, bool& degenerate) {
    norm = g.norm();
    degenerate = !(norm >= kNormFloor);
    if (degenerate) {
        f = Vector::Zero(g.size());
        f[0] = 1.0;
    } else {
        f = g / norm;
    }
}

}  // namespace

void ParameterSet::check_against(const ModelConfig& config) const {
    const std::size_t depth_l = config.hidden_layers;
    if (hidden.size() != depth_l || heads.size() != depth_l + 1 || alpha.size() != depth_l + 1)
        throw DimensionError("parameter list lengths do not match hidden_layers");
    for (std::size_t l = 0; l < hidden.size(); ++l) {
        const Eigen::Index in = l == 0 ? config.input_dim : config.hidden_units;
        check_shape(hidden[l], config.hidden_units, in, "W^(" + std::to_string(l + 1) + ")");
    }
    for (std::size_t l = 0; l < heads.size(); ++l) {
        const Eigen::Index in = l == 0 ? config.input_dim : config.hidden_units;
        check_shape(heads[l], in, config.embedding_dim, "Theta^(" + std::to_string(l) + ")");
    }
    double sum = 0.0;
    for (double a : alpha) {
        if (!(a > 0.0)) throw ContractError("alpha entries must be positive");
        sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ContractError("alpha must sum to 1");
}

std::uint64_t ParameterSet::fingerprint() const {
    std::uint64_t h = 14695981039346656037ull;
    auto mix_matrix = [&h](const Matrix& m) {
        h = fnv1a(h, static_cast<std::uint64_t>(m.rows()));
        h = fnv1a(h, static_cast<std::uint64_t>(m.cols()));
        for (Eigen::Index i = 0; i < m.size(); ++i) h = fnv1a(h, std::bit_cast<std::uint64_t>(m.data()[i]));
    };
    for (const auto& w : hidden) mix_matrix(w);
    for (const auto& t : heads) mix_matrix(t);
    for (double a : alpha) h = fnv1a(h, std::bit_cast<std::uint64_t>(a));
    return h;
}

bool ParameterSet::operator==(const ParameterSet& other) const {
    auto same = [](const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols()) return false;
            if (std::memcmp(a[i].data(), b[i].data(), sizeof(double) * a[i].size()) != 0) return false;
        }
        return true;
    };
    return same(hidden, other.hidden) && same(heads, other.heads) && alpha == other.alpha;
}

ParameterSet init_model(const ModelConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.rng_seed);
    ParameterSet params;
    const std::size_t depth_l = config.hidden_layers;
    params.hidden.reserve(depth_l);
    for (std::size_t l = 1; l <= depth_l; ++l) {
        const Eigen::Index in = l == 1 ? config.input_dim : config.hidden_units;
        params.hidden.push_back(glorot_uniform(config.hidden_units, in, rng));
    }
    params.heads.reserve(depth_l + 1);
    for (std::size_t l = 0; l <= depth_l; ++l) {
        const Eigen::Index in = l == 0 ? config.input_dim : config.hidden_units;
        params.heads.push_back(glorot_uniform(in, config.embedding_dim, rng));
    }
    params.alpha.assign(depth_l + 1, 1.0 / static_cast<double>(depth_l + 1));
    return params;
}

ForwardTrace forward(const ParameterSet& params, const Vector& x) {
    if (static_cast<std::size_t>(x.size()) != params.input_dim())
        throw DimensionError("input has length " + std::to_string(x.size()) + ", model expects " +
                             std::to_string(params.input_dim()));
    if (!x.allFinite()) throw InputError("input contains non-finite values");

    const std::size_t models = params.num_models();
    ForwardTrace t;
    t.activations.reserve(models);
    t.preactivations.reserve(params.depth());
    t.raw_embeddings.resize(models);
    t.embeddings.resize(models);
    t.raw_norms.resize(models);
    t.degenerate.resize(models);

    t.activations.push_back(x);
    for (std::size_t l = 0; l < params.depth(); ++l) {
        t.preactivations.push_back(params.hidden[l] * t.activations.back());
        t.activations.push_back(t.preactivations.back().cwiseMax(0.0));
    }
    for (std::size_t l = 0; l < models; ++l) {
        // g = h Theta as a row vector, stored as a column.
        t.raw_embeddings[l] = params.heads[l].transpose() * t.activations[l];
        bool flag = false;
        normalize_into(t.raw_embeddings[l], t.embeddings[l], t.raw_norms[l], flag);
        t.degenerate[l] = flag;
    }
    return t;
}

ForwardTrace forward(const ParameterSet& params, std::span<const double> x) {
    return forward(params, Vector(Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()))));
}

std::vector<Vector> embed(const ParameterSet& params, std::span<const double> x) {
    return forward(params, x).embeddings;
}

std::size_t parameter_count(const ModelConfig& c) {
    const std::size_t d = c.input_dim, l = c.hidden_layers, h = c.hidden_units, e = c.embedding_dim;
    std::size_t n = d * e + l * h * e + (l + 1);
    if (l >= 1) n += h * d + (l - 1) * h * h;
    return n;
}

std::size_t space_complexity_estimate(const ModelConfig& c) {
    const std::size_t d = c.input_dim, l = c.hidden_layers, h = c.hidden_units, e = c.embedding_dim;
    return d * e + l * h * (d + e) + (l * (l == 0 ? 0 : l - 1) / 2) * h * h;
}

}  // namespace oahu
