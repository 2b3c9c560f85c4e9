#include "oahu/deploy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "oahu/errors.hpp"

namespace oahu {

ReferenceStore build_store(const ParameterSet& params, const LabeledDataset& dataset) {
    if (dataset.size() == 0) throw ArgumentError("build_store: empty dataset");
    if (dataset.dim() != params.input_dim())
        throw DimensionError("build_store: dataset width " + std::to_string(dataset.dim()) +
                             " does not match model input width " + std::to_string(params.input_dim()));
    ReferenceStore store;
    store.ids = dataset.ids;
    store.labels = dataset.labels;
    store.num_classes = dataset.classes.size();
    store.fingerprint = params.fingerprint();
    const auto n = static_cast<Eigen::Index>(dataset.size());
    const auto e = static_cast<Eigen::Index>(params.embedding_dim());
    store.embeddings.assign(params.num_models(), Matrix(n, e));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto emb = embed(params, dataset.row(static_cast<std::size_t>(i)));
        for (std::size_t l = 0; l < emb.size(); ++l) store.embeddings[l].row(i) = emb[l].transpose();
    }
    return store;
}

namespace {

void check_query(const ReferenceStore& store, const std::vector<Vector>& query, std::span<const double> alpha) {
    if (query.size() != store.num_models() || alpha.size() != store.num_models())
        throw ContractError("query depth does not match the reference store");
}

void check_fingerprint(const ParameterSet& params, const ReferenceStore& store) {
    if (params.fingerprint() != store.fingerprint)
        throw CacheError("reference store was built from different parameters; rebuild it");
}

}  // namespace

std::vector<std::vector<Neighbor>> scored_neighbors(const ReferenceStore& store, const std::vector<Vector>& query,
                                                    std::span<const double> alpha, std::size_t k) {
    check_query(store, query, alpha);
    const std::size_t take = std::min(k, store.size());
    std::vector<std::vector<Neighbor>> out(store.num_models());
    std::vector<Neighbor> all(store.size());
    for (std::size_t l = 0; l < store.num_models(); ++l) {
        const Matrix& emb = store.embeddings[l];
        for (std::size_t i = 0; i < store.size(); ++i) {
            const double dist = (emb.row(static_cast<Eigen::Index>(i)).transpose() - query[l]).norm();
            all[i] = Neighbor{i, std::clamp(dist, 0.0, 2.0), 0.0};
        }
        auto closer = [](const Neighbor& a, const Neighbor& b) {
            return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
        };
        std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(), closer);
        std::vector<Neighbor>& nbrs = out[l];
        nbrs.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take));
        if (nbrs.empty()) continue;
        const double d_min = nbrs.front().distance;
        const double d_max = nbrs.back().distance;
        const double range = d_max - d_min;
        for (auto& nb : nbrs) {
            const double normalized = range > 0.0 ? (nb.distance - d_min) / range : 0.0;
            nb.score = std::exp(-normalized) * alpha[l];
        }
    }
    return out;
}

Classification classify_embedded(const ReferenceStore& store, const std::vector<Vector>& query,
                                 std::span<const double> alpha, std::size_t k) {
    if (k < 1) throw ArgumentError("classify: k must be >= 1");
    if (k > store.size())
        throw ArgumentError("classify: k=" + std::to_string(k) + " exceeds store size " + std::to_string(store.size()));
    Classification out;
    out.class_scores.assign(store.num_classes, 0.0);
    for (const auto& depth : scored_neighbors(store, query, alpha, k))
        for (const auto& nb : depth) out.class_scores[static_cast<std::size_t>(store.labels[nb.index])] += nb.score;
    // max_element keeps the first maximum, i.e. the smallest class index.
    out.label = static_cast<int>(std::max_element(out.class_scores.begin(), out.class_scores.end()) -
                                 out.class_scores.begin());
    return out;
}

Classification classify(const ParameterSet& params, const ReferenceStore& store, std::span<const double> x,
                        std::size_t k) {
    check_fingerprint(params, store);
    return classify_embedded(store, embed(params, x), params.alpha, k);
}

Verification similarity_probability_embedded(const std::vector<Vector>& e1, const std::vector<Vector>& e2,
                                             std::span<const double> alpha, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw ArgumentError("verification threshold must lie in (0, 1)");
    if (e1.size() != alpha.size() || e2.size() != alpha.size())
        throw ContractError("verification: embedding depth does not match alpha");
    Verification out;
    out.votes.resize(alpha.size());
    for (std::size_t l = 0; l < alpha.size(); ++l) {
        const double d = std::clamp((e1[l] - e2[l]).norm(), 0.0, 2.0);
        out.votes[l] = d / 2.0 < threshold ? 1 : 0;
        out.probability += alpha[l] * out.votes[l];
    }
    out.similar = out.probability >= 0.5;
    return out;
}

Verification similarity_probability(const ParameterSet& params, std::span<const double> x1,
                                    std::span<const double> x2, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw ArgumentError("verification threshold must lie in (0, 1)");
    return similarity_probability_embedded(embed(params, x1), embed(params, x2), params.alpha, threshold);
}

double similarity_score_embedded(const std::vector<Vector>& e1, const std::vector<Vector>& e2,
                                 std::span<const double> alpha) {
    if (e1.size() != alpha.size() || e2.size() != alpha.size())
        throw ContractError("verification: embedding depth does not match alpha");
    double score = 0.0;
    for (std::size_t l = 0; l < alpha.size(); ++l)
        score += alpha[l] * (1.0 - std::clamp((e1[l] - e2[l]).norm(), 0.0, 2.0) / 2.0);
    return score;
}

Retrieval retrieve_embedded(const ReferenceStore& store, const std::vector<Vector>& query,
                            std::span<const double> alpha, std::size_t k) {
    if (k < 1) throw ArgumentError("retrieve: k must be >= 1");
    std::map<InstanceId, double> best;
    for (const auto& depth : scored_neighbors(store, query, alpha, k)) {
        for (const auto& nb : depth) {
            const InstanceId id = store.ids[nb.index];
            auto [it, inserted] = best.try_emplace(id, nb.score);
            if (!inserted) it->second = std::max(it->second, nb.score);
        }
    }
    Retrieval out;
    out.items.reserve(best.size());
    for (const auto& [id, score] : best) out.items.push_back({id, score});
    std::sort(out.items.begin(), out.items.end(), [](const RetrievedItem& a, const RetrievedItem& b) {
        return a.score != b.score ? a.score > b.score : a.id < b.id;
    });
    if (out.items.size() > k) out.items.resize(k);
    out.short_list = out.items.size() < k;
    return out;
}

Retrieval retrieve(const ParameterSet& params, const ReferenceStore& store, std::span<const double> x,
                   std::size_t k) {
    check_fingerprint(params, store);
    return retrieve_embedded(store, embed(params, x), params.alpha, k);
}

}  // namespace oahu
