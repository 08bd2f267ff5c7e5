#include <benchmark/benchmark.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "newer/fit.hpp"
#include "newer/random.hpp"

using namespace newer;

namespace {

struct Instance {
    std::vector<SubcascadeSample> samples;
    FeatureMatrix features;
};

Instance make_instance(std::size_t users, std::size_t events) {
    Rng rng(3);
    Instance inst;
    std::vector<std::string> ids;
    RowMatrix x(users, 4);
    for (std::size_t i = 0; i < users; ++i) {
        x(i, 0) = std::numbers::e;
        for (std::size_t j = 1; j < 4; ++j) x(i, j) = std::exp(0.5 * rng.normal());
        const WeibullParams p{std::exp(6.0 + 0.8 * std::log(x(i, 1))), std::exp(0.4 * std::log(x(i, 2)))};
        SubcascadeSample s{"u" + std::to_string(100000 + i), {}};
        for (std::size_t k = 0; k < events; ++k) s.delays.push_back(1.0 + weibull_survival_inverse(p, rng.uniform()));
        std::sort(s.delays.begin(), s.delays.end());
        ids.push_back(s.user);
        inst.samples.push_back(std::move(s));
    }
    inst.features = FeatureMatrix({"bias", "x1", "x2", "x3"}, ids, x);
    return inst;
}

void BM_FitNewer(benchmark::State& state) {
    const Instance inst = make_instance(static_cast<std::size_t>(state.range(0)), 30);
    SolverOptions opts;
    opts.threads = static_cast<unsigned>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(fit_newer(inst.samples, inst.features, {}, opts));
}

void BM_FitCox(benchmark::State& state) {
    const Instance inst = make_instance(static_cast<std::size_t>(state.range(0)), 30);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_baseline(ModelKind::cox_shared_shape, inst.samples, inst.features, {}));
    }
}

}  // namespace

BENCHMARK(BM_FitNewer)->Args({1000, 1})->Args({1000, 4})->Args({10000, 1})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitCox)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
