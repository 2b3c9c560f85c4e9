#include "oahu/constraints.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "oahu/errors.hpp"

namespace oahu {

std::string to_string(Source source) { return source == Source::seed ? "seed" : "closure"; }

Source parse_source(const std::string& text) {
    if (text == "seed") return Source::seed;
    if (text == "closure") return Source::closure;
    throw InputError("unknown constraint source '" + text + "'");
}

IdPair make_pair_key(InstanceId a, InstanceId b) { return a < b ? IdPair{a, b} : IdPair{b, a}; }

std::tuple<InstanceId, InstanceId, InstanceId> triplet_key(const TripletConstraint& t) {
    const auto [lo, hi] = make_pair_key(t.anchor, t.positive);
    return {lo, hi, t.negative};
}

std::vector<TripletConstraint> sample_seeds(std::span<const int> labels, std::size_t n_seeds,
                                            std::uint64_t rng_seed) {
    std::map<int, std::vector<InstanceId>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(static_cast<InstanceId>(i));

    // Anchors must have a same-class partner and the dataset needs a second class.
    std::vector<InstanceId> anchors;
    for (const auto& [label, members] : by_class)
        if (members.size() >= 2) anchors.insert(anchors.end(), members.begin(), members.end());
    if (anchors.empty() || by_class.size() < 2)
        throw GenerationError("dataset admits no valid triplet: need two classes and a class with two instances");
    if (n_seeds == 0) return {};

    std::vector<InstanceId> grouped;
    std::map<int, std::pair<std::size_t, std::size_t>> blocks;
    for (const auto& [label, members] : by_class) {
        blocks[label] = {grouped.size(), members.size()};
        grouped.insert(grouped.end(), members.begin(), members.end());
    }

    std::mt19937_64 rng(rng_seed);
    std::set<std::tuple<InstanceId, InstanceId, InstanceId>> seen;
    std::vector<TripletConstraint> out;
    out.reserve(n_seeds);
    const std::size_t max_attempts = 100 * n_seeds + 1000;
    for (std::size_t attempt = 0; out.size() < n_seeds && attempt < max_attempts; ++attempt) {
        const InstanceId anchor = anchors[std::uniform_int_distribution<std::size_t>(0, anchors.size() - 1)(rng)];
        const auto& same = by_class[labels[anchor]];
        InstanceId positive = anchor;
        while (positive == anchor) positive = same[std::uniform_int_distribution<std::size_t>(0, same.size() - 1)(rng)];
        // Index into the class-grouped id list, skipping the anchor's own block.
        const auto [block_begin, block_size] = blocks[labels[anchor]];
        std::size_t pick = std::uniform_int_distribution<std::size_t>(0, labels.size() - block_size - 1)(rng);
        if (pick >= block_begin) pick += block_size;
        const InstanceId negative = grouped[pick];
        TripletConstraint t{anchor, positive, negative, out.size(), Source::seed};
        if (seen.insert(triplet_key(t)).second) out.push_back(t);
    }
    if (out.size() < n_seeds)
        throw GenerationError("could only sample " + std::to_string(out.size()) + " distinct seed triplets of " +
                              std::to_string(n_seeds) + " requested");
    return out;
}

std::vector<PairConstraint> decompose_pairs(std::span<const TripletConstraint> triplets) {
    std::vector<PairConstraint> pairs;
    pairs.reserve(2 * triplets.size());
    for (const auto& t : triplets) {
        pairs.push_back({t.anchor, t.positive, Relation::similar, t.created_at});
        pairs.push_back({t.anchor, t.negative, Relation::dissimilar, t.created_at});
    }
    return pairs;
}

namespace {

using Adjacency = std::map<InstanceId, std::vector<InstanceId>>;

Adjacency adjacency(const std::set<IdPair>& pairs) {
    Adjacency adj;
    for (const auto& [a, b] : pairs) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    return adj;
}

void seed_pair_sets(std::span<const TripletConstraint> seeds, std::set<IdPair>& similar,
                    std::set<IdPair>& dissimilar) {
    for (const auto& t : seeds) {
        if (t.anchor != t.positive) similar.insert(make_pair_key(t.anchor, t.positive));
        if (t.anchor != t.negative) dissimilar.insert(make_pair_key(t.anchor, t.negative));
    }
}

}  // namespace

DerivedPairs derive_pairs(std::span<const TripletConstraint> seeds) {
    std::set<IdPair> similar, dissimilar;
    seed_pair_sets(seeds, similar, dissimilar);
    const Adjacency sim_adj = adjacency(similar);
    const Adjacency dis_adj = adjacency(dissimilar);

    DerivedPairs out;
    for (const auto& [shared, sim_nbrs] : sim_adj) {
        // Two similar pairs through `shared` (first two rules).
        for (std::size_t i = 0; i < sim_nbrs.size(); ++i) {
            for (std::size_t j = i + 1; j < sim_nbrs.size(); ++j) {
                if (sim_nbrs[i] == sim_nbrs[j]) continue;
                const IdPair key = make_pair_key(sim_nbrs[i], sim_nbrs[j]);
                if (!similar.contains(key)) out.similar.insert(key);
            }
        }
        // A similar and a dissimilar pair through `shared` (last two rules).
        const auto it = dis_adj.find(shared);
        if (it == dis_adj.end()) continue;
        for (InstanceId u : sim_nbrs) {
            for (InstanceId v : it->second) {
                if (u == v) continue;
                const IdPair key = make_pair_key(u, v);
                if (!dissimilar.contains(key)) out.dissimilar.insert(key);
            }
        }
    }
    return out;
}

std::vector<TripletConstraint> transitive_closure(std::span<const TripletConstraint> seeds,
                                                  std::size_t budget, std::uint64_t rng_seed) {
    if (seeds.empty()) throw ArgumentError("transitive_closure: no seeds");
    std::set<IdPair> similar, dissimilar;
    seed_pair_sets(seeds, similar, dissimilar);
    const DerivedPairs derived = derive_pairs(seeds);
    similar.insert(derived.similar.begin(), derived.similar.end());
    dissimilar.insert(derived.dissimilar.begin(), derived.dissimilar.end());

    std::set<std::tuple<InstanceId, InstanceId, InstanceId>> taken;
    for (const auto& t : seeds) taken.insert(triplet_key(t));

    const Adjacency sim_adj = adjacency(similar);
    const Adjacency dis_adj = adjacency(dissimilar);
    std::vector<TripletConstraint> candidates;
    for (const auto& [anchor, positives] : sim_adj) {
        const auto it = dis_adj.find(anchor);
        if (it == dis_adj.end()) continue;
        for (InstanceId positive : positives) {
            for (InstanceId negative : it->second) {
                if (negative == positive) continue;
                TripletConstraint t{anchor, positive, negative, 0, Source::closure};
                if (taken.insert(triplet_key(t)).second) candidates.push_back(t);
            }
        }
    }

    std::mt19937_64 rng(rng_seed);
    std::shuffle(candidates.begin(), candidates.end(), rng);
    if (candidates.size() > budget) candidates.resize(budget);

    std::uint64_t next = 0;
    for (const auto& t : seeds) next = std::max(next, t.created_at + 1);
    for (auto& t : candidates) t.created_at = next++;
    return candidates;
}

StreamBuild build_stream(std::span<const TripletConstraint> seeds, std::span<const TripletConstraint> closure,
                         const std::set<IdPair>& exclusions) {
    StreamBuild out;
    out.stream.reserve(seeds.size() + closure.size());
    auto keep = [&](const TripletConstraint& t) {
        return !exclusions.contains(make_pair_key(t.anchor, t.positive)) &&
               !exclusions.contains(make_pair_key(t.anchor, t.negative)) &&
               !exclusions.contains(make_pair_key(t.positive, t.negative));
    };
    for (const auto* part : {&seeds, &closure}) {
        for (const auto& t : *part) {
            if (keep(t)) out.stream.push_back(t);
            else ++out.dropped;
        }
    }
    std::stable_sort(out.stream.begin(), out.stream.end(),
                     [](const auto& a, const auto& b) { return a.created_at < b.created_at; });
    return out;
}

void write_stream(std::ostream& out, std::span<const TripletConstraint> stream) {
    for (const auto& t : stream)
        out << t.created_at << ',' << to_string(t.source) << ',' << t.anchor << ',' << t.positive << ','
            << t.negative << '\n';
}

void write_stream(const std::filesystem::path& path, std::span<const TripletConstraint> stream,
                  const std::string& header_comment) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    std::istringstream header(header_comment);
    for (std::string line; std::getline(header, line);) out << "# " << line << '\n';
    write_stream(out, stream);
    if (!out) throw Error("failed writing stream file '" + path.string() + "'");
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        fields.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
    }
    return fields;
}

template <typename T>
T parse_unsigned(const std::string& text, std::size_t line_no) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw InputError("line " + std::to_string(line_no) + ": cannot parse '" + text + "' as an id");
    return value;
}

bool skip_line(const std::string& line) {
    const auto b = line.find_first_not_of(" \t\r");
    return b == std::string::npos || line[b] == '#';
}

}  // namespace

std::vector<TripletConstraint> read_stream(std::istream& in, std::vector<std::size_t>* line_numbers) {
    std::vector<TripletConstraint> stream;
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (skip_line(line)) continue;
        const auto f = split_fields(line);
        if (f.size() != 5)
            throw InputError("line " + std::to_string(line_no) + ": expected 5 fields, found " + std::to_string(f.size()));
        TripletConstraint t;
        t.created_at = parse_unsigned<std::uint64_t>(f[0], line_no);
        try {
            t.source = parse_source(f[1]);
        } catch (const InputError& e) {
            throw InputError("line " + std::to_string(line_no) + ": " + e.what());
        }
        t.anchor = parse_unsigned<InstanceId>(f[2], line_no);
        t.positive = parse_unsigned<InstanceId>(f[3], line_no);
        t.negative = parse_unsigned<InstanceId>(f[4], line_no);
        stream.push_back(t);
        if (line_numbers) line_numbers->push_back(line_no);
    }
    return stream;
}

std::vector<TripletConstraint> read_stream(const std::filesystem::path& path,
                                           std::vector<std::size_t>* line_numbers) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open stream file '" + path.string() + "'");
    return read_stream(in, line_numbers);
}

std::set<IdPair> read_exclusions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open exclusion file '" + path.string() + "'");
    std::set<IdPair> out;
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (skip_line(line)) continue;
        const auto f = split_fields(line);
        if (f.size() != 2) throw InputError("line " + std::to_string(line_no) + ": expected 'id_a,id_b'");
        out.insert(make_pair_key(parse_unsigned<InstanceId>(f[0], line_no), parse_unsigned<InstanceId>(f[1], line_no)));
    }
    return out;
}

}  // namespace oahu
