// Microbenchmarks for the hot paths: supernet forward/backward, one full
// bilevel epoch, and the two-phase dynamics integration.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "minidarts/dataset.hpp"
#include "minidarts/dynamics.hpp"
#include "minidarts/magnitude.hpp"
#include "minidarts/search_space.hpp"
#include "minidarts/tape.hpp"
#include "minidarts/trainer.hpp"

using namespace minidarts;

namespace {

SupernetSpec bench_spec(std::size_t feature_dim) {
    SupernetSpec spec;
    spec.feature_dim = feature_dim;
    spec.input_dim = feature_dim;
    return spec;
}

std::vector<double> random_batch(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = unit(rng);
    return v;
}

}  // namespace

static void BM_SupernetForward(benchmark::State& state) {
    SupernetSpec spec = bench_spec(static_cast<std::size_t>(state.range(0)));
    SupernetWeights weights = SupernetWeights::init(spec, 1);
    ArchParams arch = ArchParams::zeros(spec.num_edges(), spec.op_set.count());
    std::size_t batch = 32;
    std::vector<double> feats = random_batch(batch * spec.input_dim, 2);
    for (auto _ : state) {
        Tape tape;
        Tape::NodeId x =
            tape.constant({batch, spec.input_dim}, std::vector<double>(feats));
        benchmark::DoNotOptimize(
            tape.value(supernet_forward(tape, spec, weights, arch, x)).data[0]);
    }
}
BENCHMARK(BM_SupernetForward)->Arg(8)->Arg(16)->Arg(32);

static void BM_SupernetBackward(benchmark::State& state) {
    SupernetSpec spec = bench_spec(static_cast<std::size_t>(state.range(0)));
    SupernetWeights weights = SupernetWeights::init(spec, 1);
    ArchParams arch = ArchParams::zeros(spec.num_edges(), spec.op_set.count());
    std::size_t batch = 32;
    std::vector<double> feats = random_batch(batch * spec.input_dim, 2);
    std::vector<int> labels(batch);
    for (std::size_t i = 0; i < batch; ++i) labels[i] = static_cast<int>(i % 2);
    for (auto _ : state) {
        weights.for_each([](Tensor& t) { t.zero_grad(); });
        for (Tensor& a : arch.alpha) a.zero_grad();
        Tape tape;
        Tape::NodeId x =
            tape.constant({batch, spec.input_dim}, std::vector<double>(feats));
        Tape::NodeId logits = supernet_forward(tape, spec, weights, arch, x);
        tape.backward(tape.cross_entropy_softmax(logits, labels));
        benchmark::DoNotOptimize(weights.stem_w.grad[0]);
    }
}
BENCHMARK(BM_SupernetBackward)->Arg(8)->Arg(16)->Arg(32);

static void BM_BilevelEpoch(benchmark::State& state) {
    SupernetSpec spec = bench_spec(8);
    TrainConfig cfg = apply_scheme("baseline");
    cfg.batch_size = 32;
    DatasetSpec dspec;
    dspec.n = 256;
    dspec.input_dim = 8;
    Dataset full = generate_dataset(dspec);
    auto [train, val] = split_train_val(full, 1);
    BilevelTrainer trainer(spec, cfg);
    for (auto _ : state) benchmark::DoNotOptimize(trainer.run_epoch(train, val));
}
BENCHMARK(BM_BilevelEpoch);

static void BM_Magnitude(benchmark::State& state) {
    ArchParams arch = ArchParams::zeros(6, 5);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (Tensor& a : arch.alpha)
        for (double& v : a.data) v = unit(rng);
    for (auto _ : state) benchmark::DoNotOptimize(magnitude(arch));
}
BENCHMARK(BM_Magnitude);

static void BM_TwoPhaseDynamics(benchmark::State& state) {
    DynamicsConfig cfg;
    cfg.lr = 0.01;
    cfg.max_steps = 1000;
    for (auto _ : state) benchmark::DoNotOptimize(run_two_phase(cfg).x.back()[0]);
}
BENCHMARK(BM_TwoPhaseDynamics);

BENCHMARK_MAIN();
