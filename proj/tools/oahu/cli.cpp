#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "oahu/checkpoint.hpp"
#include "oahu/constraints.hpp"
#include "oahu/dataset.hpp"
#include "oahu/deploy.hpp"
#include "oahu/errors.hpp"
#include "oahu/gradcheck.hpp"
#include "oahu/metrics.hpp"
#include "oahu/trainer.hpp"
#include "run_config.hpp"

namespace oahu::cli {
namespace {

using nlohmann::json;

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    auto logger = std::make_shared<spdlog::logger>("oahu", sink);
    logger->set_pattern("[%l] %v");
    const char* env = std::getenv("OAHU_LOG");
    logger->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    return logger;
}

void add_model_flags(CLI::App* cmd, FlagOverrides& f) {
    cmd->add_option("--config", f.config_path, "JSON config file (flags override it)");
    cmd->add_option("--seed", f.seed, "RNG seed");
    cmd->add_option("--tau", f.tau, "bound-control scalar in (0, 2/3)");
    cmd->add_option("--beta", f.beta, "hedge discount in (0, 1)");
    cmd->add_option("--eta", f.eta, "learning rate");
    cmd->add_option("--smooth", f.smooth, "smoothing factor s in (0, 1)");
    cmd->add_option("--layers", f.layers, "hidden-layer count L");
    cmd->add_option("--hidden", f.hidden, "units per hidden layer");
    cmd->add_option("--emb", f.emb, "embedding width");
}

void add_data_flags(CLI::App* cmd, FlagOverrides& f) {
    cmd->add_option("--label-column", f.label_column, "name of the label column");
    cmd->add_option("--scaling", f.scaling, "feature scaling: minmax (default), zscore or none");
}

// Loads `path` and applies `record`, or scaling fitted on the file itself.
LabeledDataset load_scaled(const std::string& path, const RunConfig& config, const ScalingRecord* record = nullptr) {
    LabeledDataset raw = load_csv(path, config.label_column);
    return apply_scaling(raw, record ? *record : fit_scaling(raw, config.scaling));
}

std::string join(const std::vector<double>& v, int precision = 6) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(precision);
    for (std::size_t i = 0; i < v.size(); ++i) ss << (i ? " " : "") << v[i];
    return ss.str();
}

std::vector<int> labels_of(const LabeledDataset& ds, const std::vector<RetrievedItem>& items,
                           const std::vector<std::size_t>& row_of_id) {
    std::vector<int> out;
    out.reserve(items.size());
    for (const auto& it : items) out.push_back(ds.labels[row_of_id[it.id]]);
    return out;
}

json report_json(const EvalReport& r) {
    json metrics = json::object();
    for (const auto& [name, value] : r.metrics) metrics[name] = value;
    return {{"task", r.task}, {"metrics", metrics}, {"test_size", r.test_size}, {"class_count", r.class_count}};
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << text;
}

// ---------------------------------------------------------------- commands

int cmd_gen_constraints(const std::string& dataset_path, const std::string& out_path,
                        const std::optional<std::string>& exclude_path, const FlagOverrides& flags,
                        std::ostream& out) {
    const RunConfig config = resolve(flags);
    const LabeledDataset ds = load_csv(dataset_path, config.label_column);
    const auto seeds = sample_seeds(ds.labels, config.n_seeds, config.model.rng_seed);
    const auto closure = config.budget > 0 ? transitive_closure(seeds, config.budget, config.model.rng_seed + 1)
                                           : std::vector<TripletConstraint>{};
    const std::set<IdPair> exclusions = exclude_path ? read_exclusions(*exclude_path) : std::set<IdPair>{};
    const StreamBuild built = build_stream(seeds, closure, exclusions);

    json echo = to_json(config);
    echo["dataset"] = dataset_path;
    write_stream(out_path, built.stream, "oahu gen-constraints\nconfig " + echo.dump());
    out << "seeds: " << seeds.size() << "\nderived: " << closure.size() << "\ndropped_by_exclusion: "
        << built.dropped << "\nwritten: " << built.stream.size() << "\n";
    return kOk;
}

int cmd_train(const std::string& dataset_path, const std::string& stream_path, const std::string& out_path,
              std::optional<std::string> log_path, const FlagOverrides& flags, std::ostream& out,
              spdlog::logger& log) {
    RunConfig config = resolve(flags);
    const LabeledDataset ds = load_scaled(dataset_path, config);
    config.model.input_dim = static_cast<std::uint32_t>(ds.dim());
    config.validate();

    std::vector<std::size_t> lines;
    const auto stream = read_stream(stream_path, &lines);
    if (stream.empty()) throw ArgumentError(stream_path + ": stream has no constraints");
    std::vector<TripletFeatures> features;
    features.reserve(stream.size());
    for (std::size_t i = 0; i < stream.size(); ++i) {
        const auto& t = stream[i];
        for (InstanceId id : {t.anchor, t.positive, t.negative})
            if (id >= ds.size())
                throw InputError(stream_path + ": line " + std::to_string(lines[i]) + ": instance id " +
                                 std::to_string(id) + " not in dataset of " + std::to_string(ds.size()) + " rows");
        features.push_back({ds.row(t.anchor), ds.row(t.positive), ds.row(t.negative)});
    }

    ParameterSet params = init_model(config.model);
    if (!log_path) log_path = out_path + ".log.jsonl";
    std::ofstream log_out(*log_path, std::ios::trunc);
    if (!log_out) throw Error("cannot open '" + *log_path + "' for writing");
    json echo = to_json(config);
    echo["dataset"] = dataset_path;
    echo["stream"] = stream_path;
    log_out << json{{"config", echo}}.dump() << '\n';

    const TrainingLog training = train_stream(params, features, config.model, [&](std::size_t i, const StepReport& s) {
        log_out << json{{"step", i}, {"loss", s.loss.overall}, {"contributed", s.loss.contributed},
                        {"alpha", s.alpha_after}}
                       .dump()
                << '\n';
        if ((i + 1) % 1000 == 0) log.info("step {} loss {:.6f}", i + 1, s.loss.overall);
    });
    save_checkpoint(params, config.model, out_path);

    out << "steps: " << training.steps() << '\n'
        << "utilization: " << std::fixed << std::setprecision(2) << training.utilization() << '\n'
        << "initial_window_loss: " << std::setprecision(6) << training.initial_mean() << '\n'
        << "final_window_loss: " << training.running_mean() << '\n'
        << "alpha: " << join(params.alpha) << '\n'
        << "checkpoint: " << out_path << '\n';
    return kOk;
}

struct EvalArgs {
    std::string task;
    std::string model;
    std::string reference;
    std::string test;
    std::optional<std::string> out;
    std::optional<std::string> queries;
};

EvalReport eval_classify(const ParameterSet& params, const ReferenceStore& store, const LabeledDataset& test,
                         const RunConfig& config, std::ostream* queries) {
    std::vector<int> predicted;
    predicted.reserve(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        const Classification c = classify(params, store, test.row(i), config.k);
        predicted.push_back(c.label);
        if (queries) *queries << json{{"id", test.ids[i]}, {"label", c.label}, {"scores", c.class_scores}}.dump() << '\n';
    }
    EvalReport r;
    r.task = "classify";
    r.metrics = {{"error_rate", error_rate(test.labels, predicted)},
                 {"macro_f1", macro_f1(test.labels, predicted)},
                 {"k", static_cast<double>(config.k)}};
    return r;
}

EvalReport eval_verify(const ParameterSet& params, const LabeledDataset& test, const RunConfig& config,
                       std::ostream* queries, const std::optional<std::string>& roc_path) {
    const std::size_t n = test.size();
    if (n < 2) throw ArgumentError("verify needs at least two test instances");
    std::vector<std::vector<Vector>> emb;
    emb.reserve(n);
    for (std::size_t i = 0; i < n; ++i) emb.push_back(embed(params, test.row(i)));

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (n * (n - 1) / 2 <= config.pairs) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    } else {
        std::mt19937_64 rng(config.model.rng_seed);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::set<std::pair<std::size_t, std::size_t>> seen;
        while (pairs.size() < config.pairs) {
            auto a = pick(rng), b = pick(rng);
            if (a == b) continue;
            if (a > b) std::swap(a, b);
            if (seen.emplace(a, b).second) pairs.emplace_back(a, b);
        }
    }

    std::vector<double> scores;
    std::vector<int> same;
    std::size_t correct = 0;
    for (const auto& [a, b] : pairs) {
        const Verification v = similarity_probability_embedded(emb[a], emb[b], params.alpha, config.threshold);
        const double score = config.verify_score == "vote" ? v.probability
                                                           : similarity_score_embedded(emb[a], emb[b], params.alpha);
        const int truth = test.labels[a] == test.labels[b] ? 1 : 0;
        scores.push_back(score);
        same.push_back(truth);
        correct += (v.similar ? 1 : 0) == truth;
        if (queries)
            *queries << json{{"a", test.ids[a]}, {"b", test.ids[b]}, {"probability", v.probability},
                             {"decision", v.similar ? "similar" : "dissimilar"}, {"score", score}}
                            .dump()
                     << '\n';
    }
    const RocCurve roc = roc_curve(scores, same);
    if (roc_path) {
        std::ostringstream ss;
        ss << std::setprecision(17);
        for (const auto& p : roc.points) ss << p.false_positive_rate << ' ' << p.true_positive_rate << '\n';
        write_text(*roc_path, ss.str());
    }
    EvalReport r;
    r.task = "verify";
    r.metrics = {{"auc", roc.auc},
                 {"auc_mann_whitney", mann_whitney_auc(scores, same)},
                 {"decision_accuracy", static_cast<double>(correct) / static_cast<double>(pairs.size())},
                 {"pairs", static_cast<double>(pairs.size())},
                 {"threshold", config.threshold}};
    return r;
}

EvalReport eval_retrieve(const ParameterSet& params, const ReferenceStore& store, const LabeledDataset& reference,
                         const LabeledDataset& test, const RunConfig& config, std::ostream* queries) {
    const std::size_t k_max = *std::max_element(config.recall_ks.begin(), config.recall_ks.end());
    std::vector<std::size_t> row_of_id(*std::max_element(reference.ids.begin(), reference.ids.end()) + 1);
    for (std::size_t r = 0; r < reference.size(); ++r) row_of_id[reference.ids[r]] = r;

    std::vector<std::vector<int>> retrieved;
    std::size_t short_lists = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const Retrieval res = retrieve(params, store, test.row(i), k_max);
        short_lists += res.short_list;
        retrieved.push_back(labels_of(reference, res.items, row_of_id));
        if (queries) {
            json items = json::array();
            for (const auto& it : res.items) items.push_back({{"id", it.id}, {"score", it.score}});
            *queries << json{{"id", test.ids[i]}, {"items", items}, {"short", res.short_list}}.dump() << '\n';
        }
    }
    EvalReport r;
    r.task = "retrieve";
    for (auto k : config.recall_ks) r.metrics.emplace_back("recall@" + std::to_string(k), recall_at_k(test.labels, retrieved, k));
    r.metrics.emplace_back("short_lists", static_cast<double>(short_lists));
    return r;
}

int cmd_eval(const EvalArgs& args, const FlagOverrides& flags, std::ostream& out) {
    RunConfig config = resolve(flags);
    const auto [params, model_config] = load_checkpoint(args.model);
    config.model = model_config;

    const LabeledDataset reference_raw = load_csv(args.reference, config.label_column);
    const ScalingRecord scaling = fit_scaling(reference_raw, config.scaling);
    const LabeledDataset reference = apply_scaling(reference_raw, scaling);
    const LabeledDataset test = align_classes(load_scaled(args.test, config, &scaling), reference.classes);
    if (reference.dim() != model_config.input_dim || test.dim() != model_config.input_dim)
        throw ArgumentError("dataset width does not match the checkpoint input width " +
                            std::to_string(model_config.input_dim));

    std::ofstream query_file;
    if (args.queries) {
        query_file.open(*args.queries, std::ios::trunc);
        if (!query_file) throw Error("cannot open '" + *args.queries + "' for writing");
    }
    std::ostream* queries = args.queries ? &query_file : nullptr;

    EvalReport report;
    if (args.task == "classify") {
        report = eval_classify(params, build_store(params, reference), test, config, queries);
    } else if (args.task == "verify") {
        const std::optional<std::string> roc_path = args.out ? std::optional(*args.out + ".roc.txt") : std::nullopt;
        report = eval_verify(params, test, config, queries, roc_path);
    } else {
        report = eval_retrieve(params, build_store(params, reference), reference, test, config, queries);
    }
    report.test_size = test.size();
    report.class_count = reference.classes.size();

    json j = report_json(report);
    json echo = to_json(config);
    echo["checkpoint"] = args.model;
    echo["reference"] = args.reference;
    echo["test"] = args.test;
    j["config"] = echo;
    if (args.out) write_text(*args.out, j.dump(2) + "\n");
    out << j.dump(2) << '\n';
    return kOk;
}

int cmd_gradcheck(const FlagOverrides& flags, bool corrupt, std::ostream& out, std::ostream& err) {
    FlagOverrides f = flags;
    // Small defaults unless overridden.
    if (!f.input_dim) f.input_dim = 6;
    if (!f.layers) f.layers = 3;
    if (!f.hidden) f.hidden = 8;
    if (!f.emb) f.emb = 4;
    const RunConfig config = resolve(f);
    check_gradcheck_limits(config.model);

    GradCheckOptions options;
    options.config = config.model;
    options.trials = config.trials;
    options.seed = config.model.rng_seed + 1;
    options.corrupt_analytic = corrupt;
    const GradCheckReport report = gradient_check(options);

    out << "config: " << to_json(config.model).dump() << '\n'
        << "trials: " << report.trials << '\n'
        << "entries_checked: " << report.entries_checked << '\n'
        << "max_relative_error: " << std::scientific << std::setprecision(3) << report.max_relative_error << '\n'
        << "tolerance: " << options.tolerance << '\n';
    if (!report.worst_entry.empty()) out << "worst_entry: " << report.worst_entry << '\n';
    if (report.trials == 0) err << "warning: trials=0, nothing was checked\n";
    out << (report.passed ? "PASS" : "FAIL") << '\n';
    return report.passed ? kOk : kFailure;
}

int cmd_info(const std::string& path, std::ostream& out) {
    const auto [params, config] = load_checkpoint(path);
    out << "checkpoint: " << path << '\n'
        << "config: " << to_json(config).dump() << '\n'
        << "models: " << params.num_models() << '\n'
        << "alpha: " << join(params.alpha) << '\n'
        << "parameter_count: " << parameter_count(config) << '\n'
        << "space_complexity_estimate: " << space_complexity_estimate(config) << '\n'
        << "fingerprint: " << std::hex << params.fingerprint() << std::dec << '\n';
    return kOk;
}

int cmd_split(const std::string& dataset_path, const std::string& dev_path, const std::string& test_path,
              const FlagOverrides& flags, std::ostream& out) {
    const RunConfig config = resolve(flags);
    const LabeledDataset ds = load_csv(dataset_path, config.label_column);
    const auto [dev, test] = split(ds, config.split_ratio, config.model.rng_seed);
    save_csv(dev, dev_path);
    save_csv(test, test_path);
    out << "development: " << dev.size() << "\ntest: " << test.size() << '\n';
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    auto logger = make_logger(err);
    CLI::App app{"Online adaptive metric learning with hedge-weighted depth ensembles", "oahu"};
    app.require_subcommand(1);

    FlagOverrides flags;

    std::string dataset, stream, out_path, checkpoint, reference, test, dev_out, test_out;
    std::optional<std::string> exclude, log_path, report_out, queries_out;

    auto* gen = app.add_subcommand("gen-constraints", "sample seed triplets and expand them by transitive closure");
    gen->add_option("dataset", dataset, "labeled CSV")->required();
    gen->add_option("--out", out_path, "stream file to write")->required();
    gen->add_option("--seeds", flags.n_seeds, "number of seed triplets");
    gen->add_option("--budget", flags.budget, "maximum number of derived triplets");
    gen->add_option("--exclude", exclude, "CSV of instance-id pairs that must not appear");
    gen->add_option("--config", flags.config_path, "JSON config file");
    gen->add_option("--seed", flags.seed, "RNG seed");
    gen->add_option("--label-column", flags.label_column, "name of the label column");

    auto* train = app.add_subcommand("train", "single online pass over a constraint stream");
    train->add_option("dataset", dataset, "labeled CSV the stream ids refer to")->required();
    train->add_option("stream", stream, "constraint stream file")->required();
    train->add_option("--out", out_path, "checkpoint to write")->required();
    train->add_option("--log", log_path, "per-step JSON-lines log (default <out>.log.jsonl)");
    add_model_flags(train, flags);
    add_data_flags(train, flags);

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    eval->require_subcommand(1);
    std::string task;
    for (const char* name : {"classify", "verify", "retrieve"}) {
        auto* sub = eval->add_subcommand(name, std::string(name) + " task");
        sub->add_option("--model", checkpoint, "checkpoint")->required();
        sub->add_option("--reference", reference, "reference (training) CSV")->required();
        sub->add_option("--test", test, "test CSV")->required();
        sub->add_option("--out", report_out, "write the JSON report here");
        sub->add_option("--queries", queries_out, "write per-query JSON-lines records here");
        sub->add_option("--config", flags.config_path, "JSON config file");
        sub->add_option("--seed", flags.seed, "RNG seed for pair sampling");
        sub->add_option("--k", flags.k, "neighbors per depth");
        sub->add_option("--threshold", flags.threshold, "verification threshold T in (0, 1)");
        sub->add_option("--recall-ks", flags.recall_ks, "comma-separated K list for Recall@K");
        sub->add_option("--pairs", flags.pairs, "maximum number of verification pairs");
        sub->add_option("--score", flags.verify_score, "verification ROC score: continuous or vote");
        add_data_flags(sub, flags);
        sub->callback([&task, sub] { task = sub->get_name(); });
    }

    auto* grad = app.add_subcommand("gradcheck", "compare analytic gradients with finite differences");
    bool corrupt = false;
    add_model_flags(grad, flags);
    grad->add_option("--input-dim", flags.input_dim, "input width");
    grad->add_option("--trials", flags.trials, "random models to check");
    grad->add_flag("--corrupt-gradient", corrupt, "test hook: perturb the analytic gradient")->group("");

    auto* info = app.add_subcommand("info", "summarize a checkpoint");
    info->add_option("checkpoint", checkpoint, "checkpoint file")->required();

    auto* split_cmd = app.add_subcommand("split", "deterministic development/test split of a CSV");
    split_cmd->add_option("dataset", dataset, "labeled CSV")->required();
    split_cmd->add_option("--dev-out", dev_out, "development CSV to write")->required();
    split_cmd->add_option("--test-out", test_out, "test CSV to write")->required();
    split_cmd->add_option("--ratio", flags.ratio, "development fraction in (0, 1)");
    split_cmd->add_option("--seed", flags.seed, "RNG seed");
    split_cmd->add_option("--label-column", flags.label_column, "name of the label column");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (*gen) return cmd_gen_constraints(dataset, out_path, exclude, flags, out);
        if (*train) return cmd_train(dataset, stream, out_path, log_path, flags, out, *logger);
        if (*eval) return cmd_eval({task, checkpoint, reference, test, report_out, queries_out}, flags, out);
        if (*grad) return cmd_gradcheck(flags, corrupt, out, err);
        if (*info) return cmd_info(checkpoint, out);
        if (*split_cmd) return cmd_split(dataset, dev_out, test_out, flags, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kUsage;
}

}  // namespace oahu::cli
