#include <benchmark/benchmark.h>

#include <vector>

#include "itecp/conformal.hpp"
#include "itecp/dgp.hpp"
#include "itecp/gbm.hpp"
#include "itecp/rng.hpp"
#include "itecp/stochord.hpp"
#include "itecp/wcp.hpp"

namespace {

itecp::Matrix random_matrix(std::size_t n, std::size_t d, itecp::Rng& rng) {
    itecp::Matrix x(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c) x.at(i, c) = rng.uniform();
    return x;
}

void BM_GbmFitSquared(benchmark::State& state) {
    itecp::Rng rng(1);
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const auto x = random_matrix(n, 10, rng);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = x.at(i, 0) + 0.3 * rng.normal();
    itecp::GbmConfig cfg;
    cfg.n_trees = 100;
    for (auto _ : state) {
        auto model = itecp::fit(x, y, cfg);
        benchmark::DoNotOptimize(model);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GbmFitSquared)->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond)->Complexity();

void BM_GbmFitPinball(benchmark::State& state) {
    itecp::Rng rng(2);
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const auto x = random_matrix(n, 10, rng);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = x.at(i, 0) + 0.3 * rng.normal();
    itecp::GbmConfig cfg;
    cfg.n_trees = 100;
    cfg.loss = itecp::Loss::Pinball;
    cfg.pinball_q = 0.95;
    for (auto _ : state) {
        auto model = itecp::fit(x, y, cfg);
        benchmark::DoNotOptimize(model);
    }
}
BENCHMARK(BM_GbmFitPinball)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_GbmPredict(benchmark::State& state) {
    itecp::Rng rng(3);
    const auto x = random_matrix(1000, 10, rng);
    std::vector<double> y(1000);
    for (std::size_t i = 0; i < 1000; ++i) y[i] = x.at(i, 0);
    itecp::GbmConfig cfg;
    cfg.n_trees = 100;
    const auto model = itecp::fit(x, y, cfg);
    for (auto _ : state) {
        auto pred = model.predict(x);
        benchmark::DoNotOptimize(pred);
    }
}
BENCHMARK(BM_GbmPredict)->Unit(benchmark::kMicrosecond);

void BM_ConformalQuantile(benchmark::State& state) {
    itecp::Rng rng(4);
    std::vector<double> scores(static_cast<std::size_t>(state.range(0)));
    for (auto& s : scores) s = rng.normal();
    for (auto _ : state) {
        auto q = itecp::conformal_quantile(scores, 0.1);
        benchmark::DoNotOptimize(q);
    }
}
BENCHMARK(BM_ConformalQuantile)->Range(64, 65536);

void BM_WeightedQuantile(benchmark::State& state) {
    itecp::Rng rng(5);
    itecp::WeightedScores ws;
    ws.values.resize(static_cast<std::size_t>(state.range(0)));
    ws.weights.resize(ws.values.size());
    for (std::size_t i = 0; i < ws.values.size(); ++i) {
        ws.values[i] = rng.normal();
        ws.weights[i] = 2.0 + 2.0 * rng.uniform();
    }
    ws.test_weight = 3.0;
    for (auto _ : state) {
        auto q = itecp::weighted_conformal_quantile(ws, 0.1);
        benchmark::DoNotOptimize(q);
    }
}
BENCHMARK(BM_WeightedQuantile)->Range(64, 65536);

void BM_McxCheck(benchmark::State& state) {
    itecp::Rng rng(6);
    std::vector<double> a(static_cast<std::size_t>(state.range(0))), b(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = std::abs(rng.normal()) * 2.0;
        b[i] = std::abs(rng.normal());
    }
    const auto f = itecp::make_ecdf(a);
    const auto g = itecp::make_ecdf(b);
    const auto grid = itecp::merged_grid(f, g);
    for (auto _ : state) {
        auto r = itecp::check_mcx(f, g, grid);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_McxCheck)->Range(128, 8192);

void BM_GenerateSynthetic(benchmark::State& state) {
    itecp::SynthConfig cfg;
    cfg.n = static_cast<std::size_t>(state.range(0));
    cfg.d = 10;
    cfg.setup = itecp::Setup::B;
    for (auto _ : state) {
        auto ds = itecp::generate_synthetic(cfg);
        benchmark::DoNotOptimize(ds);
    }
}
BENCHMARK(BM_GenerateSynthetic)->Arg(2000)->Arg(20000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
