#include <benchmark/benchmark.h>

#include <cmath>
#include <string>

#include "newer/predict.hpp"
#include "newer/random.hpp"
#include "newer/sampling.hpp"

using namespace newer;

namespace {

// Star-of-stars stream: `events` replies spread over a few hundred hubs.
struct Stream {
    Cascade cascade;
    DynamicsTable table;
};

Stream make_stream(std::size_t events) {
    Rng rng(17);
    Stream s;
    s.cascade.id = "bench";
    double t = 0.0;
    for (std::size_t i = 0; i < events; ++i) {
        Event e{"u" + std::to_string(i), std::nullopt, t};
        if (i > 0) e.parent = "u" + std::to_string(rng.below(std::min<std::size_t>(i, 300)));
        s.cascade.events.push_back(e);
        s.table.set(e.user, {std::exp(4.0 + 6.0 * rng.uniform()), 0.4 + 2.0 * rng.uniform()});
        t += -2.0 * std::log(rng.uniform());
    }
    return s;
}

// Re-runs the exact predictor on the observed prefix once per simulated second.
void BM_BasicReplay(benchmark::State& state) {
    const Stream s = make_stream(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        std::size_t seen = 0;
        double acc = 0.0;
        const double end = s.cascade.events.back().time;
        for (double now = 0.0; now <= end; now += 1.0) {
            while (seen < s.cascade.size() && s.cascade.events[seen].time <= now) ++seen;
            acc += predict_final_size({s.cascade.first_events(seen), now, 100000}, s.table);
        }
        benchmark::DoNotOptimize(acc);
    }
}

void BM_SamplingStream(benchmark::State& state) {
    const Stream s = make_stream(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        SamplingPredictor sp({0.1, 100000}, s.table);
        std::size_t seen = 0;
        double acc = 0.0;
        const double end = s.cascade.events.back().time;
        for (double now = 0.0; now <= end; now += 1.0) {
            while (seen < s.cascade.size() && s.cascade.events[seen].time <= now) {
                sp.feed_event(s.cascade.events[seen++]);
            }
            acc += sp.query_size(now);
        }
        benchmark::DoNotOptimize(acc);
    }
}

void BM_FinalSize(benchmark::State& state) {
    const Stream s = make_stream(static_cast<std::size_t>(state.range(0)));
    const PartialCascade pc{s.cascade, s.cascade.events.back().time, 100000};
    for (auto _ : state) benchmark::DoNotOptimize(predict_final_size(pc, s.table));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_BasicReplay)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SamplingStream)->Arg(500)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FinalSize)->Arg(100)->Arg(10000);

BENCHMARK_MAIN();
