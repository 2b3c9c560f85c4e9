#include "run_config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "oahu/errors.hpp"

namespace oahu::cli {

void RunConfig::validate() const {
    ModelConfig probe = model;
    if (probe.input_dim == 0) probe.input_dim = 1;
    probe.validate();
    if (n_seeds == 0) throw ConfigError("seeds", "must be >= 1");
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw ConfigError("ratio", "must lie in (0, 1)");
    if (k < 1) throw ConfigError("k", "must be >= 1");
    if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold", "must lie in (0, 1)");
    if (recall_ks.empty()) throw ConfigError("recall_ks", "must list at least one K");
    for (auto v : recall_ks)
        if (v < 1) throw ConfigError("recall_ks", "every K must be >= 1");
    if (label_column.empty()) throw ConfigError("label_column", "must not be empty");
    if (pairs < 2) throw ConfigError("pairs", "must be >= 2");
    if (verify_score != "continuous" && verify_score != "vote")
        throw ConfigError("verify_score", "must be 'continuous' or 'vote'");
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::istringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(item, &used);
            if (used != item.size() || v < 1) throw std::invalid_argument(item);
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw ConfigError("recall_ks", "cannot parse '" + item + "' as a positive integer");
        }
    }
    return out;
}

void apply_json(RunConfig& c, const nlohmann::json& j) {
    auto get = [&j](const char* key, auto& target) {
        if (j.contains(key)) target = j.at(key).get<std::remove_reference_t<decltype(target)>>();
    };
    try {
        get("seed", c.model.rng_seed);
        get("tau", c.model.tau);
        get("beta", c.model.beta);
        get("eta", c.model.learning_rate);
        get("smooth", c.model.smoothing);
        get("layers", c.model.hidden_layers);
        get("hidden", c.model.hidden_units);
        get("emb", c.model.embedding_dim);
        get("input_dim", c.model.input_dim);
        get("seeds", c.n_seeds);
        get("budget", c.budget);
        get("ratio", c.split_ratio);
        get("k", c.k);
        get("threshold", c.threshold);
        get("recall_ks", c.recall_ks);
        get("label_column", c.label_column);
        get("pairs", c.pairs);
        get("verify_score", c.verify_score);
        get("trials", c.trials);
        if (j.contains("scaling")) c.scaling = parse_scaling(j.at("scaling").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config", e.what());
    }
}

RunConfig resolve(const FlagOverrides& f) {
    RunConfig c;
    if (f.config_path) {
        std::ifstream in(*f.config_path);
        if (!in) throw ConfigError("config", "cannot open '" + *f.config_path + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config", e.what());
        }
        apply_json(c, j);
    }
    if (f.seed) c.model.rng_seed = *f.seed;
    if (f.tau) c.model.tau = *f.tau;
    if (f.beta) c.model.beta = *f.beta;
    if (f.eta) c.model.learning_rate = *f.eta;
    if (f.smooth) c.model.smoothing = *f.smooth;
    if (f.layers) c.model.hidden_layers = *f.layers;
    if (f.hidden) c.model.hidden_units = *f.hidden;
    if (f.emb) c.model.embedding_dim = *f.emb;
    if (f.input_dim) c.model.input_dim = *f.input_dim;
    if (f.k) c.k = *f.k;
    if (f.n_seeds) c.n_seeds = *f.n_seeds;
    if (f.budget) c.budget = *f.budget;
    if (f.pairs) c.pairs = *f.pairs;
    if (f.trials) c.trials = *f.trials;
    if (f.threshold) c.threshold = *f.threshold;
    if (f.ratio) c.split_ratio = *f.ratio;
    if (f.recall_ks) c.recall_ks = parse_size_list(*f.recall_ks);
    if (f.label_column) c.label_column = *f.label_column;
    if (f.scaling) c.scaling = parse_scaling(*f.scaling);
    if (f.verify_score) c.verify_score = *f.verify_score;
    c.validate();
    return c;
}

nlohmann::json to_json(const ModelConfig& m) {
    return {{"input_dim", m.input_dim}, {"layers", m.hidden_layers}, {"hidden", m.hidden_units},
            {"emb", m.embedding_dim},   {"tau", m.tau},              {"beta", m.beta},
            {"smooth", m.smoothing},    {"eta", m.learning_rate},    {"seed", m.rng_seed}};
}

nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j = to_json(c.model);
    j["seeds"] = c.n_seeds;
    j["budget"] = c.budget;
    j["ratio"] = c.split_ratio;
    j["k"] = c.k;
    j["threshold"] = c.threshold;
    j["recall_ks"] = c.recall_ks;
    j["label_column"] = c.label_column;
    j["scaling"] = to_string(c.scaling);
    j["pairs"] = c.pairs;
    j["verify_score"] = c.verify_score;
    j["trials"] = c.trials;
    return j;
}

}  // namespace oahu::cli
