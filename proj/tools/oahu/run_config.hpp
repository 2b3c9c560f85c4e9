#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oahu/dataset.hpp"
#include "oahu/model.hpp"

namespace oahu::cli {

// Resolved experiment settings: built-in defaults, then the --config file,
// then individual flags.
struct RunConfig {
    ModelConfig model;
    std::size_t n_seeds = 5000;
    std::size_t budget = 5000;
    double split_ratio = 0.5;
    std::size_t k = 5;
    double threshold = 0.5;
    std::vector<std::size_t> recall_ks = {1, 2, 4, 8};
    std::string label_column = "label";
    ScalingKind scaling = ScalingKind::minmax;
    std::size_t pairs = 20000;
    std::string verify_score = "continuous";
    std::size_t trials = 10;

    /// Validates every resolved value. `input_dim` may still be unset.
    void validate() const;
};

// Flag values as parsed; unset flags leave the config untouched.
struct FlagOverrides {
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> tau, beta, eta, smooth, threshold, ratio;
    std::optional<std::uint32_t> layers, hidden, emb, input_dim;
    std::optional<std::size_t> k, n_seeds, budget, pairs, trials;
    std::optional<std::string> recall_ks, label_column, scaling, verify_score;
};

void apply_json(RunConfig& config, const nlohmann::json& j);
RunConfig resolve(const FlagOverrides& flags);

nlohmann::json to_json(const RunConfig& config);
nlohmann::json to_json(const ModelConfig& config);

std::vector<std::size_t> parse_size_list(const std::string& text);

}  // namespace oahu::cli
