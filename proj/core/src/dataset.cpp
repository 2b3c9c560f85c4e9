#include "oahu/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "oahu/errors.hpp"

namespace oahu {

std::string to_string(ScalingKind kind) {
    switch (kind) {
        case ScalingKind::none: return "none";
        case ScalingKind::minmax: return "minmax";
        case ScalingKind::zscore: return "zscore";
    }
    return "none";
}

ScalingKind parse_scaling(const std::string& text) {
    if (text == "none") return ScalingKind::none;
    if (text == "minmax") return ScalingKind::minmax;
    if (text == "zscore") return ScalingKind::zscore;
    throw ArgumentError("unknown scaling '" + text + "' (expected none, minmax or zscore)");
}

std::vector<double> ScalingRecord::apply(std::span<const double> x) const {
    if (kind == ScalingKind::none) return {x.begin(), x.end()};
    if (x.size() != offset.size()) throw DimensionError("scaling record width does not match input");
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = scale[j] > 0.0 ? (x[j] - offset[j]) / scale[j] : 0.0;
    return out;
}

int LabeledDataset::class_index(const std::string& name) const {
    const auto it = std::find(classes.begin(), classes.end(), name);
    return it == classes.end() ? -1 : static_cast<int>(it - classes.begin());
}

namespace {

std::optional<double> parse_double(const std::string& text) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || first == last) return std::nullopt;
    return value;
}

// Numbers in numeric order first, then everything else lexicographically.
bool class_less(const std::string& a, const std::string& b) {
    const auto na = parse_double(a);
    const auto nb = parse_double(b);
    if (na && nb) return *na != *nb ? *na < *nb : a < b;
    if (na != nb) return na.has_value();
    return a < b;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto b = field.find_first_not_of(" \t\r\"");
        const auto e = field.find_last_not_of(" \t\r\"");
        fields.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

LabeledDataset load_csv(const std::filesystem::path& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open dataset '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw LoadError(path.string() + ": missing header row");
    const auto header = split_csv_line(line);
    const auto label_it = std::find(header.begin(), header.end(), label_column);
    if (label_it == header.end()) throw LoadError(path.string() + ": no column named '" + label_column + "'");
    const std::size_t label_pos = static_cast<std::size_t>(label_it - header.begin());

    LabeledDataset ds;
    ds.label_column = label_column;
    ds.source = path.string();
    for (std::size_t j = 0; j < header.size(); ++j)
        if (j != label_pos) ds.feature_names.push_back(header[j]);
    const std::size_t d = ds.feature_names.size();
    if (d == 0) throw LoadError(path.string() + ": no feature columns");

    std::vector<double> values;
    std::vector<std::string> names;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw LoadError(path.string() + ": row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                            " fields, header has " + std::to_string(header.size()));
        for (std::size_t j = 0; j < fields.size(); ++j) {
            if (j == label_pos) continue;
            const auto v = parse_double(fields[j]);
            if (!v || !std::isfinite(*v))
                throw LoadError(path.string() + ": row " + std::to_string(row) + ", column '" + header[j] +
                                "': cannot parse '" + fields[j] + "' as a finite number");
            values.push_back(*v);
        }
        names.push_back(fields[label_pos]);
        ++row;
    }
    if (row == 0) throw LoadError(path.string() + ": dataset has no rows");

    ds.features = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(d));
    ds.classes = names;
    std::sort(ds.classes.begin(), ds.classes.end(), class_less);
    ds.classes.erase(std::unique(ds.classes.begin(), ds.classes.end()), ds.classes.end());
    std::map<std::string, int> index;
    for (std::size_t c = 0; c < ds.classes.size(); ++c) index[ds.classes[c]] = static_cast<int>(c);
    ds.labels.reserve(row);
    ds.ids.reserve(row);
    for (std::size_t i = 0; i < row; ++i) {
        ds.labels.push_back(index.at(names[i]));
        ds.ids.push_back(static_cast<InstanceId>(i));
    }
    return ds;
}

void save_csv(const LabeledDataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    for (std::size_t j = 0; j < dataset.dim(); ++j)
        out << (j < dataset.feature_names.size() ? dataset.feature_names[j] : "f" + std::to_string(j)) << ',';
    out << dataset.label_column << '\n';
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        for (double v : dataset.row(i)) out << format_double(v) << ',';
        out << dataset.classes[static_cast<std::size_t>(dataset.labels[i])] << '\n';
    }
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

ScalingRecord fit_scaling(const LabeledDataset& dataset, ScalingKind kind) {
    if (dataset.size() == 0) throw ArgumentError("cannot fit scaling on an empty dataset");
    ScalingRecord rec;
    rec.kind = kind;
    if (kind == ScalingKind::none) return rec;
    const std::size_t d = dataset.dim();
    rec.offset.resize(d);
    rec.scale.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        const auto col = dataset.features.col(static_cast<Eigen::Index>(j));
        if (kind == ScalingKind::minmax) {
            rec.offset[j] = col.minCoeff();
            rec.scale[j] = col.maxCoeff() - rec.offset[j];
        } else {
            const double mean = col.mean();
            rec.offset[j] = mean;
            rec.scale[j] = std::sqrt((col.array() - mean).square().mean());
        }
    }
    return rec;
}

LabeledDataset apply_scaling(const LabeledDataset& dataset, const ScalingRecord& record) {
    LabeledDataset out = dataset;
    out.scaling = record;
    if (record.kind == ScalingKind::none) return out;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto scaled = record.apply(dataset.row(i));
        std::copy(scaled.begin(), scaled.end(), out.features.data() + i * out.dim());
    }
    return out;
}

LabeledDataset scale_minmax(const LabeledDataset& dataset) {
    return apply_scaling(dataset, fit_scaling(dataset, ScalingKind::minmax));
}

namespace {

LabeledDataset subset(const LabeledDataset& ds, std::span<const std::size_t> rows) {
    LabeledDataset out;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ds.dim()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.features.row(static_cast<Eigen::Index>(r)) = ds.features.row(static_cast<Eigen::Index>(rows[r]));
        out.labels.push_back(ds.labels[rows[r]]);
        out.ids.push_back(ds.ids[rows[r]]);
    }
    out.classes = ds.classes;
    out.feature_names = ds.feature_names;
    out.label_column = ds.label_column;
    out.source = ds.source;
    out.scaling = ds.scaling;
    return out;
}

}  // namespace

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& dataset, double ratio,
                                                std::uint64_t rng_seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw ArgumentError("split ratio must lie in (0, 1)");
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(rng_seed);
    std::shuffle(order.begin(), order.end(), rng);
    const auto dev = static_cast<std::size_t>(std::floor(static_cast<double>(order.size()) * ratio));
    const std::span<const std::size_t> all(order);
    return {subset(dataset, all.first(dev)), subset(dataset, all.subspan(dev))};
}

LabeledDataset align_classes(const LabeledDataset& dataset, const std::vector<std::string>& reference) {
    LabeledDataset out = dataset;
    out.classes = reference;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::string& name = dataset.classes[static_cast<std::size_t>(dataset.labels[i])];
        auto it = std::find(out.classes.begin(), out.classes.end(), name);
        if (it == out.classes.end()) {
            out.classes.push_back(name);
            it = out.classes.end() - 1;
        }
        out.labels[i] = static_cast<int>(it - out.classes.begin());
    }
    return out;
}

}  // namespace oahu
