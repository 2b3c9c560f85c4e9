#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "oahu/constraints.hpp"
#include "oahu/dataset.hpp"
#include "oahu/model.hpp"

namespace oahu {

/// Labeled reference instances with their cached unit embeddings at every
/// depth. The fingerprint ties the cache to the parameters it came from.
struct ReferenceStore {
    std::vector<InstanceId> ids;
    std::vector<int> labels;
    std::size_t num_classes = 0;
    std::vector<Matrix> embeddings;  // per depth: n x S_emb
    std::uint64_t fingerprint = 0;

    std::size_t size() const noexcept { return ids.size(); }
    std::size_t num_models() const noexcept { return embeddings.size(); }
};

ReferenceStore build_store(const ParameterSet& params, const LabeledDataset& dataset);

struct Neighbor {
    std::size_t index = 0;  // row in the store
    double distance = 0.0;
    double score = 0.0;     // exp(-(D - d_min)/(d_max - d_min)) * alpha
};

/// k nearest store rows at each depth, scored with per-depth min/max
/// normalization. Ties in distance go to the lower row index.
std::vector<std::vector<Neighbor>> scored_neighbors(const ReferenceStore& store,
                                                    const std::vector<Vector>& query,
                                                    std::span<const double> alpha, std::size_t k);

struct Classification {
    int label = -1;
    std::vector<double> class_scores;
};

Classification classify(const ParameterSet& params, const ReferenceStore& store,
                        std::span<const double> x, std::size_t k);
Classification classify_embedded(const ReferenceStore& store, const std::vector<Vector>& query,
                                 std::span<const double> alpha, std::size_t k);

struct Verification {
    double probability = 0.0;
    bool similar = false;
    std::vector<int> votes;  // p_l per depth
};

Verification similarity_probability(const ParameterSet& params, std::span<const double> x1,
                                    std::span<const double> x2, double threshold);
Verification similarity_probability_embedded(const std::vector<Vector>& e1, const std::vector<Vector>& e2,
                                             std::span<const double> alpha, double threshold);

/// Continuous verification score sum_l alpha_l * (1 - D_l / 2), in [0, 1].
double similarity_score_embedded(const std::vector<Vector>& e1, const std::vector<Vector>& e2,
                                 std::span<const double> alpha);

struct RetrievedItem {
    InstanceId id = 0;
    double score = 0.0;
};

struct Retrieval {
    std::vector<RetrievedItem> items;
    bool short_list = false;  // fewer than k distinct candidates were available
};

Retrieval retrieve(const ParameterSet& params, const ReferenceStore& store, std::span<const double> x,
                   std::size_t k);
Retrieval retrieve_embedded(const ReferenceStore& store, const std::vector<Vector>& query,
                            std::span<const double> alpha, std::size_t k);

}  // namespace oahu
