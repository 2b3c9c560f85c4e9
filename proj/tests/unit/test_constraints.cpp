#include <filesystem>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oahu/constraints.hpp"
#include "oahu/errors.hpp"

using namespace oahu;

namespace {

std::vector<int> class_labels(std::size_t per_class, int classes) {
    std::vector<int> labels;
    for (int c = 0; c < classes; ++c) labels.insert(labels.end(), per_class, c);
    return labels;
}

void expect_label_valid(const std::vector<TripletConstraint>& ts, const std::vector<int>& labels) {
    for (const auto& t : ts) {
        EXPECT_NE(t.anchor, t.positive);
        EXPECT_EQ(labels[t.anchor], labels[t.positive]);
        EXPECT_NE(labels[t.anchor], labels[t.negative]);
    }
}

// Applies the four rules by brute force over every ordered instance triple.
DerivedPairs brute_force_rules(const std::set<IdPair>& sim, const std::set<IdPair>& dis, InstanceId n) {
    auto s = [&](InstanceId a, InstanceId b) { return sim.contains(make_pair_key(a, b)); };
    auto d = [&](InstanceId a, InstanceId b) { return dis.contains(make_pair_key(a, b)); };
    DerivedPairs out;
    for (InstanceId x1 = 0; x1 < n; ++x1)
        for (InstanceId x2 = 0; x2 < n; ++x2)
            for (InstanceId x3 = 0; x3 < n; ++x3) {
                if (x1 == x2 || x1 == x3 || x2 == x3) continue;
                const IdPair k = make_pair_key(x2, x3);
                if (s(x1, x2) && s(x1, x3) && !sim.contains(k)) out.similar.insert(k);
                if (s(x1, x2) && d(x1, x3) && !dis.contains(k)) out.dissimilar.insert(k);
                // The second and fourth rules are the first and third with the shared endpoint renamed.
                const IdPair k13 = make_pair_key(x1, x3);
                if (s(x1, x2) && s(x2, x3) && !sim.contains(k13)) out.similar.insert(k13);
                if (s(x1, x2) && d(x2, x3) && !dis.contains(k13)) out.dissimilar.insert(k13);
            }
    return out;
}

}  // namespace

TEST(SampleSeeds, SmallestFeasibleDataset) {
    const std::vector<int> labels{0, 0, 1, 1};
    const auto seeds = sample_seeds(labels, 1, 5);
    ASSERT_EQ(seeds.size(), 1u);
    expect_label_valid(seeds, labels);
    EXPECT_EQ(seeds[0].created_at, 0u);
    EXPECT_EQ(seeds[0].source, Source::seed);
}

TEST(SampleSeeds, ValidDistinctAndDeterministic) {
    const auto labels = class_labels(50, 4);
    const auto a = sample_seeds(labels, 2000, 9);
    const auto b = sample_seeds(labels, 2000, 9);
    const auto c = sample_seeds(labels, 2000, 10);
    ASSERT_EQ(a.size(), 2000u);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    expect_label_valid(a, labels);
    std::set<std::tuple<InstanceId, InstanceId, InstanceId>> keys;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].created_at, i);
        keys.insert(triplet_key(a[i]));
    }
    EXPECT_EQ(keys.size(), a.size());
}

TEST(SampleSeeds, InfeasibleDatasetsFail) {
    EXPECT_THROW(sample_seeds(std::vector<int>{0, 0, 0}, 1, 1), GenerationError);
    EXPECT_THROW(sample_seeds(std::vector<int>{0, 1, 2}, 1, 1), GenerationError);
    // 2x2 only admits 4 distinct triplets.
    EXPECT_THROW(sample_seeds(std::vector<int>{0, 0, 1, 1}, 5, 1), GenerationError);
}

TEST(Closure, TwoSimilarPairsGiveASimilarPair) {
    // Seeds (1 sim 2) and (1 sim 3); negatives 4 and 5.
    const std::vector<TripletConstraint> seeds{{1, 2, 4, 0}, {1, 3, 5, 1}};
    const DerivedPairs d = derive_pairs(seeds);
    EXPECT_TRUE(d.similar.contains(IdPair{2, 3}));
}

TEST(Closure, SimilarAndDissimilarGiveADissimilarPair) {
    const std::vector<TripletConstraint> seeds{{1, 2, 3, 0}};
    const DerivedPairs d = derive_pairs(seeds);
    EXPECT_TRUE(d.dissimilar.contains(IdPair{2, 3}));
    EXPECT_TRUE(d.similar.empty());
}

TEST(Closure, SingleSeedYieldsNoNewTriplet) {
    const std::vector<TripletConstraint> seeds{{0, 1, 2, 0}};
    EXPECT_TRUE(transitive_closure(seeds, 1, 3).empty());
    EXPECT_TRUE(transitive_closure(seeds, 0, 3).empty());
}

TEST(Closure, DerivedPairsMatchBruteForce) {
    const auto labels = class_labels(4, 3);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto seeds = sample_seeds(labels, 12, seed);
        std::set<IdPair> sim, dis;
        for (const auto& t : seeds) {
            sim.insert(make_pair_key(t.anchor, t.positive));
            dis.insert(make_pair_key(t.anchor, t.negative));
        }
        const DerivedPairs expected = brute_force_rules(sim, dis, static_cast<InstanceId>(labels.size()));
        const DerivedPairs got = derive_pairs(seeds);
        EXPECT_EQ(got.similar, expected.similar) << "seed " << seed;
        EXPECT_EQ(got.dissimilar, expected.dissimilar) << "seed " << seed;
    }
}

TEST(Closure, OutputIsValidUniqueAndContinuesCreationOrder) {
    const auto labels = class_labels(30, 3);
    const auto seeds = sample_seeds(labels, 200, 1);
    const auto closure = transitive_closure(seeds, 200, 2);
    ASSERT_EQ(closure.size(), 200u);
    expect_label_valid(closure, labels);
    std::set<std::tuple<InstanceId, InstanceId, InstanceId>> keys;
    for (const auto& t : seeds) keys.insert(triplet_key(t));
    for (std::size_t i = 0; i < closure.size(); ++i) {
        EXPECT_TRUE(keys.insert(triplet_key(closure[i])).second);
        EXPECT_EQ(closure[i].created_at, 200u + i);
        EXPECT_EQ(closure[i].source, Source::closure);
    }
    EXPECT_EQ(closure, transitive_closure(seeds, 200, 2));
    EXPECT_TRUE(transitive_closure(seeds, 0, 2).empty());
}

TEST(BuildStream, LengthOrderAndExclusion) {
    const auto labels = class_labels(40, 3);
    const auto seeds = sample_seeds(labels, 300, 4);
    const auto closure = transitive_closure(seeds, 300, 5);
    const StreamBuild all = build_stream(seeds, closure);
    EXPECT_EQ(all.stream.size(), seeds.size() + closure.size());
    EXPECT_EQ(all.dropped, 0u);
    for (std::size_t i = 0; i < all.stream.size(); ++i) EXPECT_EQ(all.stream[i].created_at, i);
    for (std::size_t i = 0; i < seeds.size(); ++i) EXPECT_EQ(all.stream[i].source, Source::seed);

    const std::set<IdPair> excl{make_pair_key(seeds[7].positive, seeds[7].anchor)};
    const StreamBuild filtered = build_stream(seeds, closure, excl);
    EXPECT_GE(filtered.dropped, 1u);
    EXPECT_EQ(filtered.stream.size() + filtered.dropped, all.stream.size());
    for (const auto& t : filtered.stream) {
        EXPECT_NE(t, seeds[7]);
        EXPECT_FALSE(excl.contains(make_pair_key(t.anchor, t.positive)));
        EXPECT_FALSE(excl.contains(make_pair_key(t.anchor, t.negative)));
        EXPECT_FALSE(excl.contains(make_pair_key(t.positive, t.negative)));
    }
}

TEST(BuildStream, SortsByCreationIndex) {
    const std::vector<TripletConstraint> seeds{{0, 1, 2, 3}, {0, 1, 3, 0}};
    const std::vector<TripletConstraint> closure{{1, 0, 4, 1, Source::closure}};
    const StreamBuild s = build_stream(seeds, closure);
    ASSERT_EQ(s.stream.size(), 3u);
    EXPECT_EQ(s.stream[0].created_at, 0u);
    EXPECT_EQ(s.stream[1].source, Source::closure);
    EXPECT_EQ(s.stream[2].created_at, 3u);
}

TEST(StreamFile, RoundTripWithCommentsAndLineNumbers) {
    const auto labels = class_labels(10, 2);
    const auto seeds = sample_seeds(labels, 20, 1);
    const auto closure = transitive_closure(seeds, 20, 1);
    const auto stream = build_stream(seeds, closure).stream;
    const auto path = std::filesystem::temp_directory_path() / "oahu_test_stream.csv";
    write_stream(path, stream, "generated for a test\nseed=1");
    std::vector<std::size_t> lines;
    const auto back = read_stream(path, &lines);
    std::filesystem::remove(path);
    EXPECT_EQ(back, stream);
    ASSERT_EQ(lines.size(), stream.size());
    EXPECT_EQ(lines.front(), 3u);
}

TEST(StreamFile, MalformedLinesReportTheirLine) {
    std::istringstream in("# header\n0,seed,1,2,3\n1,seed,1,x,3\n");
    try {
        read_stream(in);
        FAIL() << "expected InputError";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
    std::istringstream bad_source("0,derived,1,2,3\n");
    EXPECT_THROW(read_stream(bad_source), InputError);
    std::istringstream short_line("0,seed,1,2\n");
    EXPECT_THROW(read_stream(short_line), InputError);
}

TEST(PairExport, EachTripletGivesOneSimilarAndOneDissimilarPair) {
    const std::vector<TripletConstraint> ts{{4, 5, 6, 2}};
    const auto pairs = decompose_pairs(ts);
    ASSERT_EQ(pairs.size(), 2u);
    EXPECT_EQ(pairs[0].relation, Relation::similar);
    EXPECT_EQ(pairs[0].b, 5u);
    EXPECT_EQ(pairs[1].relation, Relation::dissimilar);
    EXPECT_EQ(pairs[1].b, 6u);
    EXPECT_EQ(pairs[1].created_at, 2u);
}
