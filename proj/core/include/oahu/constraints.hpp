#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace oahu {

using InstanceId = std::uint32_t;

enum class Relation { similar, dissimilar };
enum class Source { seed, closure };

std::string to_string(Source source);
Source parse_source(const std::string& text);

struct PairConstraint {
    InstanceId a = 0;
    InstanceId b = 0;
    Relation relation = Relation::similar;
    std::uint64_t created_at = 0;
};

struct TripletConstraint {
    InstanceId anchor = 0;
    InstanceId positive = 0;
    InstanceId negative = 0;
    std::uint64_t created_at = 0;
    Source source = Source::seed;

    bool operator==(const TripletConstraint&) const = default;
};

// Unordered instance pair, stored (min, max).
using IdPair = std::pair<InstanceId, InstanceId>;
IdPair make_pair_key(InstanceId a, InstanceId b);

// Duplicate identity: {anchor, positive} as a set plus the negative.
std::tuple<InstanceId, InstanceId, InstanceId> triplet_key(const TripletConstraint& t);

/// Uniformly samples `n_seeds` distinct triplets with label(anchor) ==
/// label(positive) != label(negative). `labels[i]` is the class of instance i.
/// created_at runs 0, 1, ... in sampling order.
std::vector<TripletConstraint> sample_seeds(std::span<const int> labels, std::size_t n_seeds,
                                            std::uint64_t rng_seed);

struct DerivedPairs {
    std::set<IdPair> similar;
    std::set<IdPair> dissimilar;
};

/// Splits triplets into (anchor, positive) similar and (anchor, negative) dissimilar pairs.
std::vector<PairConstraint> decompose_pairs(std::span<const TripletConstraint> triplets);

/// One application of the closure rules over the seed pairs. Only pairs not
/// already present among the seeds are returned.
///   sim(x1,x2) & sim(x1,x3) -> sim(x2,x3)
///   sim(x1,x2) & sim(x2,x3) -> sim(x1,x3)
///   sim(x1,x2) & dis(x1,x3) -> dis(x2,x3)
///   sim(x1,x2) & dis(x2,x3) -> dis(x1,x3)
DerivedPairs derive_pairs(std::span<const TripletConstraint> seeds);

/// Joins seed and derived pairs that share an endpoint into new triplets
/// (shared endpoint becomes the anchor), drops anything that duplicates a
/// seed, shuffles by `rng_seed` and keeps at most `budget`. created_at
/// continues after the largest seed index.
std::vector<TripletConstraint> transitive_closure(std::span<const TripletConstraint> seeds,
                                                  std::size_t budget, std::uint64_t rng_seed);

struct StreamBuild {
    std::vector<TripletConstraint> stream;
    std::size_t dropped = 0;
};

/// Concatenates, sorts by created_at and drops any constraint that contains
/// an excluded instance pair.
StreamBuild build_stream(std::span<const TripletConstraint> seeds,
                         std::span<const TripletConstraint> closure,
                         const std::set<IdPair>& exclusions = {});

// Stream file: one "created_at,source,anchor_id,positive_id,negative_id"
// record per line. Lines starting with '#' are comments.
void write_stream(std::ostream& out, std::span<const TripletConstraint> stream);
void write_stream(const std::filesystem::path& path, std::span<const TripletConstraint> stream,
                  const std::string& header_comment = {});
/// `line_numbers`, when given, receives the 1-based file line of each record.
std::vector<TripletConstraint> read_stream(std::istream& in, std::vector<std::size_t>* line_numbers = nullptr);
std::vector<TripletConstraint> read_stream(const std::filesystem::path& path,
                                           std::vector<std::size_t>* line_numbers = nullptr);

/// Exclusion file: "id_a,id_b" per line, '#' comments allowed.
std::set<IdPair> read_exclusions(const std::filesystem::path& path);

}  // namespace oahu
