#include "oahu/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>

#include "oahu/errors.hpp"

namespace oahu {
namespace {

void check_labels(std::span<const int> y_true, std::span<const int> y_pred) {
    if (y_true.size() != y_pred.size()) throw ArgumentError("label sequences differ in length");
    if (y_true.empty()) throw ArgumentError("label sequences are empty");
}

void check_binary(std::span<const double> scores, std::span<const int> positive) {
    if (scores.size() != positive.size()) throw ArgumentError("scores and labels differ in length");
    const auto pos = std::count_if(positive.begin(), positive.end(), [](int v) { return v != 0; });
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(positive.size()))
        throw UndefinedMetricError("ROC/AUC needs at least one positive and one negative");
}

}  // namespace

double error_rate(std::span<const int> y_true, std::span<const int> y_pred) {
    check_labels(y_true, y_pred);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) wrong += y_true[i] != y_pred[i];
    return static_cast<double>(wrong) / static_cast<double>(y_true.size());
}

double macro_f1(std::span<const int> y_true, std::span<const int> y_pred) {
    check_labels(y_true, y_pred);
    const std::set<int> classes(y_true.begin(), y_true.end());
    double sum = 0.0;
    for (int c : classes) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            const bool t = y_true[i] == c, p = y_pred[i] == c;
            tp += t && p;
            fp += !t && p;
            fn += t && !p;
        }
        const double precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
        const double recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
        sum += precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
    }
    return sum / static_cast<double>(classes.size());
}

double utilization(std::size_t contributed, std::size_t steps) {
    if (steps == 0) throw ArgumentError("utilization of an empty training log");
    if (contributed > steps) throw ArgumentError("more contributing steps than steps");
    return static_cast<double>(contributed) / static_cast<double>(steps);
}

double utilization(const TrainingLog& log) { return utilization(log.contributed(), log.steps()); }

RocCurve roc_curve(std::span<const double> scores, std::span<const int> positive) {
    check_binary(scores, positive);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double n_pos = 0.0, n_neg = 0.0;
    for (int p : positive) (p != 0 ? n_pos : n_neg) += 1.0;

    RocCurve curve;
    curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    double tp = 0.0, fp = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        const double threshold = scores[order[i]];
        // Everything tied at this score crosses the threshold together.
        for (; i < order.size() && scores[order[i]] == threshold; ++i) (positive[order[i]] != 0 ? tp : fp) += 1.0;
        curve.points.push_back({fp / n_neg, tp / n_pos, threshold});
    }
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto& a = curve.points[i - 1];
        const auto& b = curve.points[i];
        curve.auc += (b.false_positive_rate - a.false_positive_rate) *
                     (a.true_positive_rate + b.true_positive_rate) / 2.0;
    }
    return curve;
}

double mann_whitney_auc(std::span<const double> scores, std::span<const int> positive) {
    check_binary(scores, positive);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> rank(scores.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) rank[order[t]] = midrank;
        i = j;
    }
    double n_pos = 0.0, rank_sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (positive[i] != 0) {
            n_pos += 1.0;
            rank_sum += rank[i];
        }
    }
    const double n_neg = static_cast<double>(scores.size()) - n_pos;
    return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

double recall_at_k(std::span<const int> query_labels, const std::vector<std::vector<int>>& retrieved_labels,
                   std::size_t k) {
    if (k < 1) throw ArgumentError("Recall@K needs K >= 1");
    if (query_labels.size() != retrieved_labels.size()) throw ArgumentError("one retrieved list per query required");
    if (query_labels.empty()) throw ArgumentError("no queries");
    std::size_t hits = 0;
    for (std::size_t q = 0; q < query_labels.size(); ++q) {
        const auto& list = retrieved_labels[q];
        const auto end = list.begin() + static_cast<std::ptrdiff_t>(std::min(k, list.size()));
        hits += std::find(list.begin(), end, query_labels[q]) != end;
    }
    return static_cast<double>(hits) / static_cast<double>(query_labels.size());
}

}  // namespace oahu
