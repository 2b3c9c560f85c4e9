#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "oahu/trainer.hpp"

namespace oahu {

double error_rate(std::span<const int> y_true, std::span<const int> y_pred);

/// Unweighted mean of per-class F1 over the classes present in `y_true`.
/// Precision or recall of 0/0 counts as 0.
double macro_f1(std::span<const int> y_true, std::span<const int> y_pred);

/// Fraction of steps whose overall loss was nonzero.
double utilization(const TrainingLog& log);
double utilization(std::size_t contributed, std::size_t steps);

struct RocPoint {
    double false_positive_rate = 0.0;
    double true_positive_rate = 0.0;
    double threshold = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // from (0,0) to (1,1)
    double auc = 0.0;              // trapezoidal area under `points`
};

/// Sweeps a threshold down through the distinct scores; higher score means
/// more likely positive. Throws UndefinedMetricError unless both classes occur.
RocCurve roc_curve(std::span<const double> scores, std::span<const int> positive);

/// Mann-Whitney U / (n_pos * n_neg) from midranks (ties count one half).
double mann_whitney_auc(std::span<const double> scores, std::span<const int> positive);

/// Mean over queries of [a same-class item is among the first K retrieved].
double recall_at_k(std::span<const int> query_labels, const std::vector<std::vector<int>>& retrieved_labels,
                   std::size_t k);

struct EvalReport {
    std::string task;
    std::vector<std::pair<std::string, double>> metrics;
    std::size_t test_size = 0;
    std::size_t class_count = 0;
    std::map<std::string, std::string> config;
};

}  // namespace oahu
