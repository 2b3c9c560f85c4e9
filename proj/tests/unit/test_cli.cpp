#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "oahu/checkpoint.hpp"
#include "oahu/constraints.hpp"
#include "oahu/dataset.hpp"
#include "oahu/deploy.hpp"
#include "oahu/metrics.hpp"
#include "cli.hpp"

namespace fs = std::filesystem;
using namespace oahu;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Three Gaussian blobs in 4-d, one CSV per split.
class CliTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = fs::temp_directory_path() / "oahu_cli_test";
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        write_blobs(dir_ / "train.csv", 60, 1);
        write_blobs(dir_ / "test.csv", 20, 2);
    }
    static void TearDownTestSuite() { fs::remove_all(dir_); }

    static void write_blobs(const fs::path& path, int per_class, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, 0.5);
        const double centers[3][4] = {{3, 0, 0, 1}, {0, 3, 1, 0}, {-2, -2, 0, -1}};
        std::ofstream out(path);
        out << "a,b,c,d,label\n";
        for (int c = 0; c < 3; ++c)
            for (int i = 0; i < per_class; ++i) {
                for (int j = 0; j < 4; ++j) out << centers[c][j] + noise(rng) << ',';
                out << "class" << c << '\n';
            }
    }

    static std::string path(const std::string& name) { return (dir_ / name).string(); }

    static fs::path dir_;
};

fs::path CliTest::dir_;

std::string line_value(const std::string& text, const std::string& key) {
    std::istringstream ss(text);
    for (std::string line; std::getline(ss, line);)
        if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
    return {};
}

}  // namespace

TEST_F(CliTest, GenConstraintsWritesSeedsThenClosure) {
    const Result r = run_cli({"gen-constraints", path("train.csv"), "--out", path("s.csv"), "--seeds", "500",
                              "--budget", "500", "--seed", "3"});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_EQ(line_value(r.out, "seeds"), "500");
    EXPECT_EQ(line_value(r.out, "derived"), "500");
    const auto stream = read_stream(fs::path(path("s.csv")));
    ASSERT_EQ(stream.size(), 1000u);
    for (std::size_t i = 0; i < stream.size(); ++i) {
        EXPECT_EQ(stream[i].created_at, i);
        EXPECT_EQ(stream[i].source, i < 500 ? Source::seed : Source::closure);
    }
    const LabeledDataset ds = load_csv(path("train.csv"));
    for (const auto& t : stream) {
        EXPECT_EQ(ds.labels[t.anchor], ds.labels[t.positive]);
        EXPECT_NE(ds.labels[t.anchor], ds.labels[t.negative]);
    }
    EXPECT_EQ(read_file(path("s.csv")).front(), '#');
}

TEST_F(CliTest, GenConstraintsZeroBudgetAndExclusions) {
    Result r = run_cli({"gen-constraints", path("train.csv"), "--out", path("s0.csv"), "--seeds", "50", "--budget",
                        "0"});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    const auto stream = read_stream(fs::path(path("s0.csv")));
    EXPECT_EQ(stream.size(), 50u);
    std::ofstream(path("excl.csv")) << "# held out\n" << stream[0].anchor << ',' << stream[0].positive << '\n';
    r = run_cli({"gen-constraints", path("train.csv"), "--out", path("s1.csv"), "--seeds", "50", "--budget", "0",
                 "--exclude", path("excl.csv")});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_NE(line_value(r.out, "dropped_by_exclusion"), "0");
    for (const auto& t : read_stream(fs::path(path("s1.csv"))))
        EXPECT_NE(make_pair_key(t.anchor, t.positive), make_pair_key(stream[0].anchor, stream[0].positive));
}

TEST_F(CliTest, GenConstraintsRejectsSingleClassData) {
    std::ofstream(path("one.csv")) << "x,label\n1,a\n2,a\n3,a\n";
    const Result r = run_cli({"gen-constraints", path("one.csv"), "--out", path("never.csv"), "--seeds", "2"});
    EXPECT_EQ(r.code, cli::kFailure);
    EXPECT_NE(r.err.find("error:"), std::string::npos);
    EXPECT_FALSE(fs::exists(path("never.csv")));
}

TEST_F(CliTest, TrainIsDeterministicAndFullyUtilized) {
    ASSERT_EQ(run_cli({"gen-constraints", path("train.csv"), "--out", path("t.csv"), "--seeds", "300", "--budget",
                       "300"}).code,
              cli::kOk);
    const Result a = run_cli({"train", path("train.csv"), path("t.csv"), "--out", path("a.oahu"), "--layers", "2",
                              "--hidden", "16", "--emb", "4"});
    ASSERT_EQ(a.code, cli::kOk) << a.err;
    EXPECT_EQ(line_value(a.out, "steps"), "600");
    EXPECT_EQ(line_value(a.out, "utilization"), "1.00");
    const Result b = run_cli({"train", path("train.csv"), path("t.csv"), "--out", path("b.oahu"), "--layers", "2",
                              "--hidden", "16", "--emb", "4"});
    ASSERT_EQ(b.code, cli::kOk) << b.err;
    EXPECT_EQ(read_file(path("a.oahu")), read_file(path("b.oahu")));

    std::ifstream log(path("a.oahu") + ".log.jsonl");
    std::string line;
    ASSERT_TRUE(std::getline(log, line));
    EXPECT_TRUE(nlohmann::json::parse(line).contains("config"));
    std::size_t records = 0;
    while (std::getline(log, line)) {
        const auto j = nlohmann::json::parse(line);
        EXPECT_EQ(j.at("step").get<std::size_t>(), records);
        ++records;
    }
    EXPECT_EQ(records, 600u);
}

TEST_F(CliTest, TrainRejectsBadConfig) {
    const Result r = run_cli({"train", path("train.csv"), path("t.csv"), "--out", path("x.oahu"), "--tau", "0.7"});
    EXPECT_EQ(r.code, cli::kFailure);
    EXPECT_NE(r.err.find("tau"), std::string::npos) << r.err;
    EXPECT_EQ(run_cli({"train", "--bogus"}).code, cli::kUsage);
}

TEST_F(CliTest, ClassifySingleModelOneNeighborMatchesNearestNeighbor) {
    ASSERT_EQ(run_cli({"gen-constraints", path("train.csv"), "--out", path("c.csv"), "--seeds", "200", "--budget",
                       "0"}).code,
              cli::kOk);
    ASSERT_EQ(run_cli({"train", path("train.csv"), path("c.csv"), "--out", path("l0.oahu"), "--layers", "0",
                       "--emb", "3"}).code,
              cli::kOk);
    const Result r = run_cli({"eval", "classify", "--model", path("l0.oahu"), "--reference", path("train.csv"),
                              "--test", path("test.csv"), "--k", "1", "--out", path("report.json")});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    const auto report = nlohmann::json::parse(read_file(path("report.json")));
    const double reported = report.at("metrics").at("error_rate").get<double>();

    // Independent nearest-neighbor pass in embedding space.
    const auto [params, config] = load_checkpoint(path("l0.oahu"));
    const LabeledDataset ref_raw = load_csv(path("train.csv"));
    const ScalingRecord rec = fit_scaling(ref_raw, ScalingKind::minmax);
    const LabeledDataset ref = apply_scaling(ref_raw, rec);
    const LabeledDataset test = align_classes(apply_scaling(load_csv(path("test.csv")), rec), ref.classes);
    std::size_t wrong = 0;
    for (std::size_t q = 0; q < test.size(); ++q) {
        const Vector f = embed(params, test.row(q))[0];
        std::size_t best = 0;
        double best_d = INFINITY;
        for (std::size_t i = 0; i < ref.size(); ++i) {
            const double d = (embed(params, ref.row(i))[0] - f).norm();
            if (d < best_d) best_d = d, best = i;
        }
        wrong += ref.labels[best] != test.labels[q];
    }
    EXPECT_DOUBLE_EQ(reported, static_cast<double>(wrong) / static_cast<double>(test.size()));
    EXPECT_EQ(report.at("config").at("k").get<int>(), 1);
}

TEST_F(CliTest, VerifyAndRetrieveReports) {
    ASSERT_EQ(run_cli({"gen-constraints", path("train.csv"), "--out", path("v.csv"), "--seeds", "300", "--budget",
                       "300"}).code,
              cli::kOk);
    ASSERT_EQ(run_cli({"train", path("train.csv"), path("v.csv"), "--out", path("v.oahu"), "--layers", "2",
                       "--hidden", "16", "--emb", "4", "--scaling", "zscore"}).code,
              cli::kOk);
    Result r = run_cli({"eval", "verify", "--model", path("v.oahu"), "--reference", path("train.csv"), "--test",
                        path("test.csv"), "--scaling", "zscore", "--out", path("verify.json")});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    auto report = nlohmann::json::parse(r.out);
    const double auc = report.at("metrics").at("auc").get<double>();
    EXPECT_GT(auc, 0.5);
    EXPECT_NEAR(auc, report.at("metrics").at("auc_mann_whitney").get<double>(), 1e-9);
    EXPECT_TRUE(fs::exists(path("verify.json") + ".roc.txt"));

    r = run_cli({"eval", "retrieve", "--model", path("v.oahu"), "--reference", path("train.csv"), "--test",
                 path("test.csv"), "--scaling", "zscore", "--recall-ks", "1,2,4,8"});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    report = nlohmann::json::parse(r.out);
    double last = 0.0;
    for (const char* key : {"recall@1", "recall@2", "recall@4", "recall@8"}) {
        const double v = report.at("metrics").at(key).get<double>();
        EXPECT_GE(v, last) << key;
        last = v;
    }
}

TEST_F(CliTest, GradientCheckCommand) {
    Result r = run_cli({"gradcheck"});
    EXPECT_EQ(r.code, cli::kOk) << r.out << r.err;
    EXPECT_NE(r.out.find("PASS"), std::string::npos);
    r = run_cli({"gradcheck", "--trials", "0"});
    EXPECT_EQ(r.code, cli::kOk);
    EXPECT_NE(r.err.find("warning"), std::string::npos);
    r = run_cli({"gradcheck", "--corrupt-gradient"});
    EXPECT_EQ(r.code, cli::kFailure);
    EXPECT_NE(r.out.find("FAIL"), std::string::npos);
    EXPECT_EQ(run_cli({"gradcheck", "--layers", "9"}).code, cli::kFailure);
}

TEST_F(CliTest, InfoOnFreshAndCorruptCheckpoints) {
    ModelConfig c;
    c.input_dim = 4;
    c.hidden_layers = 5;
    c.hidden_units = 10;
    c.embedding_dim = 3;
    save_checkpoint(init_model(c), c, path("fresh.oahu"));
    Result r = run_cli({"info", path("fresh.oahu")});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_EQ(line_value(r.out, "models"), "6");
    std::istringstream alpha(line_value(r.out, "alpha"));
    int n = 0;
    for (std::string v; alpha >> v; ++n) EXPECT_NEAR(std::stod(v), 1.0 / 6.0, 1e-6);
    EXPECT_EQ(n, 6);
    EXPECT_EQ(line_value(r.out, "parameter_count"), std::to_string(parameter_count(c)));
    EXPECT_EQ(line_value(r.out, "space_complexity_estimate"), std::to_string(space_complexity_estimate(c)));

    const std::string bytes = read_file(path("fresh.oahu"));
    std::ofstream(path("cut.oahu"), std::ios::binary) << bytes.substr(0, bytes.size() / 2);
    r = run_cli({"info", path("cut.oahu")});
    EXPECT_EQ(r.code, cli::kFailure);
    EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST_F(CliTest, SplitWritesBothParts) {
    const Result r = run_cli({"split", path("train.csv"), "--dev-out", path("dev.csv"), "--test-out",
                              path("rest.csv"), "--ratio", "0.25"});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_EQ(load_csv(path("dev.csv")).size(), 45u);
    EXPECT_EQ(load_csv(path("rest.csv")).size(), 135u);
}
