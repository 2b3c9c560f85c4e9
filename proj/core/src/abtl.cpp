#include "oahu/abtl.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "oahu/errors.hpp"

namespace oahu {
namespace {

constexpr double kUnitTolerance = 1e-6;
constexpr double kBoundSlack = 1e-12;
// Hinge values at or below this are rounding residue of unit-norm arithmetic.
constexpr double kHingeFloor = 1e-12;

double hinge(double v) { return v > kHingeFloor ? v : 0.0; }

void check_unit(const Vector& v) {
    if (std::abs(v.norm() - 1.0) > kUnitTolerance) throw ContractError("distance: input is not unit-norm");
}

void check_distance(double d) {
    if (!(d >= 0.0 && d <= 2.0)) throw DomainError("distance " + std::to_string(d) + " outside [0, 2]");
}

// Derivative of ||a - b|| w.r.t. a; zero at coincidence (subgradient choice).
Vector distance_direction(const Vector& a, const Vector& b) {
    const Vector diff = a - b;
    const double n = diff.norm();
    if (n <= 0.0) return Vector::Zero(a.size());
    return diff / n;
}

}  // namespace

double distance(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionError("distance: vectors differ in length");
    check_unit(a);
    check_unit(b);
    return std::clamp((a - b).norm(), 0.0, 2.0);
}

void check_tau(double tau) {
    if (!(tau > 0.0 && tau < 2.0 / 3.0)) throw DomainError("tau must lie in (0, 2/3)");
}

double sim_threshold(double d_orig, double tau) {
    check_distance(d_orig);
    check_tau(tau);
    const double e2 = std::exp(2.0);
    return tau / (e2 - 1.0) * std::expm1(d_orig);
}

double dis_threshold(double d_orig, double tau) {
    check_distance(d_orig);
    check_tau(tau);
    const double a2 = tau / (1.0 - std::exp(-2.0));
    return -a2 * std::expm1(-d_orig) + (2.0 - tau);
}

double attractive_loss(double d_orig_pos, double c1) {
    check_distance(d_orig_pos);
    if (!(c1 >= 0.0 && c1 < 2.0 / 3.0)) throw DomainError("similarity bound outside [0, tau]");
    return hinge((d_orig_pos - c1) / (2.0 - c1));
}

double repulsive_loss(double d_orig_neg, double c2) {
    check_distance(d_orig_neg);
    if (!(c2 > 4.0 / 3.0 - kBoundSlack && c2 <= 2.0 + kBoundSlack))
        throw DomainError("dissimilarity bound outside [2 - tau, 2]");
    return hinge(1.0 - d_orig_neg / c2);
}

double local_loss_with_bounds(double d_pos, double d_neg, double c1, double c2) {
    return 0.5 * (hinge((d_pos - c1) / (2.0 - c1)) + hinge(1.0 - d_neg / c2));
}

std::vector<double> TripletLossReport::local_losses() const {
    std::vector<double> out;
    out.reserve(depths.size());
    for (const auto& d : depths) out.push_back(d.local);
    return out;
}

TripletLossReport triplet_loss(const std::vector<Vector>& anchor, const std::vector<Vector>& positive,
                               const std::vector<Vector>& negative, const std::vector<double>& alpha,
                               double tau) {
    check_tau(tau);
    const std::size_t models = alpha.size();
    if (anchor.size() != models || positive.size() != models || negative.size() != models)
        throw ContractError("triplet_loss: embedding depth does not match alpha");

    TripletLossReport report;
    report.depths.resize(models);
    for (std::size_t l = 0; l < models; ++l) {
        DepthLoss& r = report.depths[l];
        r.d_pos = distance(anchor[l], positive[l]);
        r.d_neg = distance(anchor[l], negative[l]);
        r.sim_bound = sim_threshold(r.d_pos, tau);
        r.dis_bound = dis_threshold(r.d_neg, tau);
        r.attractive = attractive_loss(r.d_pos, r.sim_bound);
        r.repulsive = repulsive_loss(r.d_neg, r.dis_bound);
        r.local = 0.5 * (r.attractive + r.repulsive);
        report.overall += alpha[l] * r.local;
    }
    report.contributed = report.overall > 0.0;
    return report;
}

TripletLossReport triplet_loss(const ParameterSet& params, const TripletTraces& traces, double tau) {
    const std::size_t models = params.num_models();
    if (traces.anchor.num_models() != models || traces.positive.num_models() != models ||
        traces.negative.num_models() != models)
        throw ContractError("triplet_loss: traces do not match the parameter set");
    return triplet_loss(traces.anchor.embeddings, traces.positive.embeddings, traces.negative.embeddings,
                        params.alpha, tau);
}

EmbeddingGradients loss_gradient_wrt_embeddings(const TripletLossReport& report,
                                                const std::vector<Vector>& anchor,
                                                const std::vector<Vector>& positive,
                                                const std::vector<Vector>& negative) {
    const std::size_t models = report.depths.size();
    if (anchor.size() != models || positive.size() != models || negative.size() != models)
        throw ContractError("gradient: embeddings do not match the loss report");

    EmbeddingGradients g;
    g.anchor.resize(models);
    g.positive.resize(models);
    g.negative.resize(models);
    for (std::size_t l = 0; l < models; ++l) {
        const DepthLoss& r = report.depths[l];
        const auto width = anchor[l].size();
        g.anchor[l] = Vector::Zero(width);
        g.positive[l] = Vector::Zero(width);
        g.negative[l] = Vector::Zero(width);
        if (r.attractive > 0.0) {
            const Vector dir = distance_direction(anchor[l], positive[l]);
            const double scale = 0.5 / (2.0 - r.sim_bound);
            g.anchor[l] += scale * dir;
            g.positive[l] -= scale * dir;
        }
        if (r.repulsive > 0.0) {
            const Vector dir = distance_direction(anchor[l], negative[l]);
            const double scale = -0.5 / r.dis_bound;
            g.anchor[l] += scale * dir;
            g.negative[l] -= scale * dir;
        }
    }
    return g;
}

EmbeddingGradients loss_gradient_wrt_embeddings(const TripletLossReport& report,
                                                const TripletTraces& traces) {
    return loss_gradient_wrt_embeddings(report, traces.anchor.embeddings, traces.positive.embeddings,
                                        traces.negative.embeddings);
}

}  // namespace oahu
