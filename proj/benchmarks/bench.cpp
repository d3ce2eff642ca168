#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "uniocc/geostat.hpp"
#include "uniocc/occupancy.hpp"

namespace {

std::vector<uniocc::TrainingPoint> random_points(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-10.0, 10.0);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    std::vector<uniocc::TrainingPoint> points;
    points.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        points.push_back({coord(rng), coord(rng), value(rng)});
    return points;
}

void BM_OccupancyFromFlows(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    std::vector<double> y(n, 2.0), z(n, 2.0);
    z[0] = 0.0;
    y[0] = 4.0;
    y[n - 1] = 0.0;
    z[n - 1] = 4.0;
    for (auto _ : state)
        benchmark::DoNotOptimize(uniocc::occupancy_from_flows(y, z));
}
BENCHMARK(BM_OccupancyFromFlows)->Arg(16)->Arg(64)->Arg(256);

void BM_KrigingFactorize(benchmark::State& state) {
    auto points = random_points(static_cast<std::size_t>(state.range(0)), 7);
    uniocc::VariogramModel v{0.01, 0.05, 3.0};
    for (auto _ : state)
        benchmark::DoNotOptimize(uniocc::KrigingModel(points, v));
}
BENCHMARK(BM_KrigingFactorize)->Arg(20)->Arg(100)->Arg(300);

void BM_KrigingQuery(benchmark::State& state) {
    auto points = random_points(static_cast<std::size_t>(state.range(0)), 7);
    uniocc::VariogramModel v{0.01, 0.05, 3.0};
    uniocc::KrigingModel model(points, v);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coord(-10.0, 10.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(model.predict(coord(rng), coord(rng)));
}
BENCHMARK(BM_KrigingQuery)->Arg(20)->Arg(100)->Arg(300);

void BM_VariogramFit(benchmark::State& state) {
    uniocc::VariogramModel truth{0.01, 0.04, 2.0};
    std::vector<uniocc::VariogramBin> bins;
    for (int i = 0; i < 12; ++i) {
        double h = 0.25 + 0.5 * i;
        bins.push_back({h, truth.gamma(h), 100});
    }
    for (auto _ : state)
        benchmark::DoNotOptimize(uniocc::fit_exponential(bins, 6.0));
}
BENCHMARK(BM_VariogramFit);

} // namespace

BENCHMARK_MAIN();
