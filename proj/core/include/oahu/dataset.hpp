#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "oahu/constraints.hpp"
#include "oahu/model.hpp"

namespace oahu {

enum class ScalingKind { none, minmax, zscore };

std::string to_string(ScalingKind kind);
ScalingKind parse_scaling(const std::string& text);

/// Per-column affine map x' = (x - offset) / scale, fitted once on the
/// training data and reapplied unchanged to queries. Columns with zero scale
/// map to 0.
struct ScalingRecord {
    ScalingKind kind = ScalingKind::none;
    std::vector<double> offset;
    std::vector<double> scale;

    std::vector<double> apply(std::span<const double> x) const;
};

struct LabeledDataset {
    Matrix features;                   // n x d, row-major
    std::vector<int> labels;           // index into `classes`
    std::vector<std::string> classes;  // class names, numeric-aware order
    std::vector<InstanceId> ids;       // stable ids (row index at load time)
    std::vector<std::string> feature_names;
    std::string label_column = "label";
    std::string source;
    ScalingRecord scaling;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(features.cols()); }
    std::span<const double> row(std::size_t i) const {
        return {features.data() + i * dim(), dim()};
    }
    /// Index of `name` in `classes`, or -1.
    int class_index(const std::string& name) const;
};

/// Comma-delimited with a header row; every non-label column must be numeric.
LabeledDataset load_csv(const std::filesystem::path& path, const std::string& label_column = "label");

/// Writes features with shortest round-trip formatting; label column last.
void save_csv(const LabeledDataset& dataset, const std::filesystem::path& path);

ScalingRecord fit_scaling(const LabeledDataset& dataset, ScalingKind kind);
LabeledDataset apply_scaling(const LabeledDataset& dataset, const ScalingRecord& record);
LabeledDataset scale_minmax(const LabeledDataset& dataset);

/// Deterministic shuffle by `rng_seed`, then the first floor(n * ratio)
/// instances form the development part and the rest the test part.
std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& dataset, double ratio,
                                                std::uint64_t rng_seed);

/// Rewrites `dataset` labels against `reference.classes`; classes unknown to
/// the reference are appended after it.
LabeledDataset align_classes(const LabeledDataset& dataset, const std::vector<std::string>& reference);

}  // namespace oahu
