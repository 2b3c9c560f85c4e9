#pragma once

#include <vector>

#include "oahu/model.hpp"

namespace oahu {

/// Euclidean distance between two unit vectors, clamped to [0, 2].
/// Throws ContractError if either input is off the unit sphere by more than 1e-6.
double distance(const Vector& a, const Vector& b);

/// Throws DomainError unless 0 < tau < 2/3.
void check_tau(double tau);

/// Adaptive similarity threshold tau/(e^2-1) * (e^D - 1), in [0, tau].
double sim_threshold(double d_orig, double tau);

/// Adaptive dissimilarity threshold -tau/(1-e^-2) * (e^-D - 1) + (2 - tau), in [2-tau, 2].
double dis_threshold(double d_orig, double tau);

/// max{0, (D - c1) / (2 - c1)} for a similar pair at distance D.
double attractive_loss(double d_orig_pos, double c1);

/// max{0, 1 - D / c2} for a dissimilar pair at distance D.
/// Both hinges report values at or below 1e-12 as exactly zero.
double repulsive_loss(double d_orig_neg, double c2);

struct DepthLoss {
    double d_pos = 0.0;
    double d_neg = 0.0;
    double sim_bound = 0.0;  // c1
    double dis_bound = 0.0;  // c2
    double attractive = 0.0;
    double repulsive = 0.0;
    double local = 0.0;
};

struct TripletLossReport {
    std::vector<DepthLoss> depths;
    double overall = 0.0;
    bool contributed = false;

    std::vector<double> local_losses() const;
};

/// Traces of the three roles of one triplet, all produced by the same parameters.
struct TripletTraces {
    ForwardTrace anchor;
    ForwardTrace positive;
    ForwardTrace negative;
};

/// Per-depth losses from the current (pre-update) distances and the
/// alpha-weighted overall loss.
TripletLossReport triplet_loss(const ParameterSet& params, const TripletTraces& traces, double tau);

/// Same, from raw per-depth unit embeddings and weights (no network involved).
TripletLossReport triplet_loss(const std::vector<Vector>& anchor, const std::vector<Vector>& positive,
                               const std::vector<Vector>& negative, const std::vector<double>& alpha,
                               double tau);

/// Local loss at distances (D_pos, D_neg) with the bounds held fixed.
double local_loss_with_bounds(double d_pos, double d_neg, double c1, double c2);

/// d L_local^(l) / d f^(l) for each role; bounds are treated as constants.
struct EmbeddingGradients {
    std::vector<Vector> anchor;
    std::vector<Vector> positive;
    std::vector<Vector> negative;
};

EmbeddingGradients loss_gradient_wrt_embeddings(const TripletLossReport& report,
                                                const TripletTraces& traces);

EmbeddingGradients loss_gradient_wrt_embeddings(const TripletLossReport& report,
                                                const std::vector<Vector>& anchor,
                                                const std::vector<Vector>& positive,
                                                const std::vector<Vector>& negative);

}  // namespace oahu
