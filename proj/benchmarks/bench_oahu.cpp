#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "oahu/deploy.hpp"
#include "oahu/trainer.hpp"

using namespace oahu;

namespace {

ModelConfig bench_config(std::int64_t layers) {
    ModelConfig c;
    c.input_dim = 32;
    c.hidden_layers = static_cast<std::uint32_t>(layers);
    c.rng_seed = 1;
    return c;
}

std::vector<std::vector<double>> random_rows(std::size_t n, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    for (auto& r : rows)
        for (auto& v : r) v = g(rng);
    return rows;
}

void BM_Forward(benchmark::State& state) {
    const ModelConfig c = bench_config(state.range(0));
    const ParameterSet p = init_model(c);
    const auto x = random_rows(1, c.input_dim, 2)[0];
    for (auto _ : state) benchmark::DoNotOptimize(forward(p, x));
}
BENCHMARK(BM_Forward)->Arg(0)->Arg(2)->Arg(5)->Arg(10);

void BM_TrainStep(benchmark::State& state) {
    const ModelConfig c = bench_config(state.range(0));
    ParameterSet p = init_model(c);
    const auto rows = random_rows(3, c.input_dim, 3);
    const TripletFeatures t{rows[0], rows[1], rows[2]};
    for (auto _ : state) benchmark::DoNotOptimize(train_step(p, t, c));
}
BENCHMARK(BM_TrainStep)->Arg(0)->Arg(2)->Arg(5)->Arg(10);

void BM_Classify(benchmark::State& state) {
    const ModelConfig c = bench_config(5);
    const ParameterSet p = init_model(c);
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto rows = random_rows(n, c.input_dim, 4);
    LabeledDataset ds;
    ds.features = Matrix(static_cast<Eigen::Index>(n), c.input_dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < c.input_dim; ++j)
            ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        ds.labels.push_back(static_cast<int>(i % 10));
        ds.ids.push_back(static_cast<InstanceId>(i));
    }
    for (int k = 0; k < 10; ++k) ds.classes.push_back(std::to_string(k));
    const ReferenceStore store = build_store(p, ds);
    const auto query = random_rows(1, c.input_dim, 5)[0];
    for (auto _ : state) benchmark::DoNotOptimize(classify(p, store, query, 5));
}
BENCHMARK(BM_Classify)->Arg(1000)->Arg(10000);

}  // namespace
BENCHMARK_MAIN();
