#include <benchmark/benchmark.h>

#include <vector>

#include "classp/mlp.hpp"
#include "classp/optim.hpp"
#include "classp/rng.hpp"

namespace {

using namespace classp;

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
    Pcg32 rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = rng.next_normal();
    return v;
}

void BM_matmul(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Pcg32 rng(1);
    const Matrix a = rand_normal(rng, n, n);
    const Matrix b = rand_normal(rng, n, n);
    for (auto _ : state) {
        Matrix c = matmul(a, b);
        benchmark::DoNotOptimize(c.data.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_matmul)->Arg(64)->Arg(128)->Arg(256);

void BM_classp_step(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<double> params = random_vec(n, 2);
    const std::vector<double> grads = random_vec(n, 3);
    ClasspState st(n);
    ClasspConfig cfg;
    cfg.threshold = 0.25; // gate roughly half the elements
    for (auto _ : state) {
        classp_step(params, grads, st, cfg);
        benchmark::DoNotOptimize(params.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}
BENCHMARK(BM_classp_step)->Arg(1 << 10)->Arg(1 << 17);

void BM_adagrad_step(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<double> params = random_vec(n, 2);
    const std::vector<double> grads = random_vec(n, 3);
    AdagradState st(n);
    for (auto _ : state) {
        adagrad_step(params, grads, st, 0.01, 1e-8);
        benchmark::DoNotOptimize(params.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}
BENCHMARK(BM_adagrad_step)->Arg(1 << 10)->Arg(1 << 17);

void BM_adam_step(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<double> params = random_vec(n, 2);
    const std::vector<double> grads = random_vec(n, 3);
    AdamState st(n);
    const AdamConfig cfg;
    for (auto _ : state) {
        adam_step(params, grads, st, cfg);
        benchmark::DoNotOptimize(params.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}
BENCHMARK(BM_adam_step)->Arg(1 << 10)->Arg(1 << 17);

void BM_mlp_forward_backward(benchmark::State& state) {
    const auto batch = static_cast<std::size_t>(state.range(0));
    Pcg32 rng(4);
    const std::size_t sizes[] = {784, 128, 10};
    MlpParams params = MlpParams::he_init(sizes, rng);
    const Matrix x = rand_normal(rng, batch, 784);
    std::vector<int> labels(batch);
    for (std::size_t i = 0; i < batch; ++i) labels[i] = static_cast<int>(rng.next_below(10));
    for (auto _ : state) {
        ForwardCache cache;
        const Matrix logits = mlp_forward(params, x, &cache);
        const LossGrad lg = cross_entropy_loss(logits, labels);
        GradientSet grads = mlp_backward(params, cache, lg.dlogits);
        benchmark::DoNotOptimize(grads.layers.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_mlp_forward_backward)->Arg(16)->Arg(64);

} // namespace

BENCHMARK_MAIN();
