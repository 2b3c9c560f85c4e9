#include <random>

#include <gtest/gtest.h>

#include "oahu/errors.hpp"
#include "oahu/metrics.hpp"

using namespace oahu;

namespace {

// Fraction of positive/negative pairs ordered correctly, ties worth one half.
double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
    double good = 0.0, total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[i] != 1 || y[j] != 0) continue;
            total += 1.0;
            good += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
        }
    return good / total;
}

}  // namespace

TEST(ErrorRate, DirectCounts) {
    const std::vector<int> t{0, 0, 1, 1};
    EXPECT_EQ(error_rate(t, t), 0.0);
    EXPECT_DOUBLE_EQ(error_rate(t, std::vector<int>{0, 0, 1, 0}), 0.25);
    EXPECT_EQ(error_rate(t, std::vector<int>{1, 1, 0, 0}), 1.0);
    EXPECT_THROW(error_rate(t, std::vector<int>{0, 0, 1}), ArgumentError);
    EXPECT_THROW(error_rate(std::vector<int>{}, std::vector<int>{}), ArgumentError);
}

TEST(MacroF1, HandConfusionMatrix) {
    const std::vector<int> t{0, 0, 1, 1};
    EXPECT_DOUBLE_EQ(macro_f1(t, t), 1.0);
    EXPECT_NEAR(macro_f1(t, std::vector<int>{0, 0, 1, 0}), (0.8 + 2.0 / 3.0) / 2.0, 1e-15);
    EXPECT_NEAR(macro_f1(t, std::vector<int>{0, 0, 1, 0}), 0.73333, 1e-5);
}

TEST(MacroF1, ClassNeverPredictedCountsAsZero) {
    // Class 1: no true positives, so its F1 is 0. Class 0: P = 2/4, R = 1.
    EXPECT_NEAR(macro_f1(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 0, 0, 0}), (2.0 / 3.0 + 0.0) / 2.0,
                1e-15);
    // A predicted class absent from y_true does not enter the mean.
    EXPECT_NEAR(macro_f1(std::vector<int>{0, 0}, std::vector<int>{0, 2}), 2.0 / 3.0, 1e-15);
}

TEST(MacroF1, InvariantUnderRelabeling) {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> c(0, 3);
    std::vector<int> t(200), p(200);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = c(rng), p[i] = c(rng);
    const std::vector<int> perm{2, 0, 3, 1};
    std::vector<int> t2(t.size()), p2(p.size());
    for (std::size_t i = 0; i < t.size(); ++i) t2[i] = perm[t[i]], p2[i] = perm[p[i]];
    EXPECT_NEAR(macro_f1(t, p), macro_f1(t2, p2), 1e-15);
    EXPECT_EQ(error_rate(t, p), error_rate(t2, p2));
}

TEST(Utilization, Ratios) {
    EXPECT_EQ(utilization(5, 5), 1.0);
    EXPECT_DOUBLE_EQ(utilization(4, 5), 0.8);
    EXPECT_THROW(utilization(0, 0), ArgumentError);
}

TEST(Roc, HandExample) {
    const std::vector<double> s{0.9, 0.35, 0.4, 0.3};
    const std::vector<int> y{1, 1, 0, 0};
    const RocCurve r = roc_curve(s, y);
    EXPECT_DOUBLE_EQ(r.auc, 0.75);
    EXPECT_DOUBLE_EQ(mann_whitney_auc(s, y), 0.75);
    EXPECT_EQ(r.points.front().false_positive_rate, 0.0);
    EXPECT_EQ(r.points.front().true_positive_rate, 0.0);
    EXPECT_EQ(r.points.back().false_positive_rate, 1.0);
    EXPECT_EQ(r.points.back().true_positive_rate, 1.0);
}

TEST(Roc, SeparatedAndTiedScores) {
    EXPECT_EQ(roc_curve(std::vector<double>{0.9, 0.8, 0.2}, std::vector<int>{1, 1, 0}).auc, 1.0);
    EXPECT_EQ(roc_curve(std::vector<double>{0.5, 0.5, 0.5, 0.5}, std::vector<int>{1, 0, 1, 0}).auc, 0.5);
    EXPECT_THROW(roc_curve(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), UndefinedMetricError);
    EXPECT_THROW(mann_whitney_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{0, 0}), UndefinedMetricError);
}

TEST(Roc, CurveAreaMatchesPairwiseCount) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> coarse(0, 9);
    std::bernoulli_distribution label(0.4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> s(60);
        std::vector<int> y(60);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = coarse(rng) / 10.0, y[i] = label(rng);
        y[0] = 1, y[1] = 0;
        const double expected = pairwise_auc(s, y);
        EXPECT_NEAR(roc_curve(s, y).auc, expected, 1e-9);
        EXPECT_NEAR(mann_whitney_auc(s, y), expected, 1e-9);
        const RocCurve c = roc_curve(s, y);
        for (std::size_t i = 1; i < c.points.size(); ++i) {
            EXPECT_GE(c.points[i].false_positive_rate, c.points[i - 1].false_positive_rate);
            EXPECT_GE(c.points[i].true_positive_rate, c.points[i - 1].true_positive_rate);
        }
    }
}

TEST(RecallAtK, FirstHitRanks) {
    const std::vector<int> q{0, 1, 2};
    // Same-class item first appears at rank 1, rank 3, never.
    const std::vector<std::vector<int>> lists{{0, 1, 1}, {0, 2, 1}, {0, 1, 1}};
    EXPECT_NEAR(recall_at_k(q, lists, 2), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(recall_at_k(q, lists, 3), 2.0 / 3.0, 1e-15);
    EXPECT_EQ(recall_at_k(std::vector<int>{0}, {{0}}, 1), 1.0);
    EXPECT_EQ(recall_at_k(std::vector<int>{0}, {{1, 1}}, 2), 0.0);
    EXPECT_THROW(recall_at_k(q, lists, 0), ArgumentError);
}

TEST(RecallAtK, NonDecreasingInK) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> c(0, 4);
    std::vector<int> q(100);
    std::vector<std::vector<int>> lists(100, std::vector<int>(10));
    for (std::size_t i = 0; i < q.size(); ++i) {
        q[i] = c(rng);
        for (auto& v : lists[i]) v = c(rng);
    }
    double last = 0.0;
    for (std::size_t k = 1; k <= 10; ++k) {
        const double r = recall_at_k(q, lists, k);
        EXPECT_GE(r, last);
        last = r;
    }
}
