#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "thermaval/geometry.hpp"
#include "thermaval/sensitivity.hpp"
#include "thermaval/thermal.hpp"
#include "thermaval/weather.hpp"

using namespace thermaval;

namespace {

const geometry::Rect3 kEmitter{{0, 0, 0}, {4, 0, 0}, {0, 2, 0}};
const geometry::Rect3 kReceiver{{0.3, 0, 0.2}, {0, 0, 1.5}, {3.5, 0, 0}};

void bm_mc_serial(benchmark::State& state) {
    auto rays = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) {
        auto est = geometry::mc_view_factor_serial(kEmitter, kReceiver, rays, 42);
        benchmark::DoNotOptimize(est.value);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(rays));
}

void bm_mc_parallel(benchmark::State& state) {
    auto rays = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) {
        auto est = geometry::mc_view_factor(kEmitter, kReceiver, rays, 42);
        benchmark::DoNotOptimize(est.value);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(rays));
}

thermal::BuildingModel bench_model() {
    thermal::BuildingModel m;
    m.site = {-21.0, 55.5, 4.0, 0.2};
    m.zones.push_back({"room", 40.0, 0.0, ""});
    thermal::Wall w;
    w.name = "south";
    w.area = 9.0;
    w.layers = {{0.15, 1.75, 2400.0, 880.0}};
    w.side_a = thermal::Boundary::to_zone("room");
    w.side_b = thermal::Boundary::exterior();
    w.orientation = {90.0, 0.0};
    m.walls.push_back(w);
    thermal::Window win;
    win.name = "win";
    win.zone = "room";
    win.width = 2.0;
    win.height = 1.0;
    win.area = 2.0;
    win.orientation = {90.0, 0.0};
    m.windows.push_back(win);
    return m;
}

std::vector<sensitivity::FactorSpec> bench_factors() {
    return {
        {"t_out", "weather:t_out", 0.05, 0, 0.0},
        {"conductivity", "wall:*:*:conductivity", 0.10, 0, 0.0},
        {"density", "wall:*:*:density", 0.10, 0, 0.0},
    };
}

void bm_ensemble(benchmark::State& state, bool parallel) {
    auto model = bench_model();
    auto wx = weather::synth_weather(2, weather::WeatherProfile::Mixed, 3);
    sensitivity::EnsembleOptions opt;
    opt.n_runs = static_cast<int>(state.range(0));
    opt.parallel = parallel;
    for (auto _ : state) {
        auto factors = bench_factors();  // frequencies are assigned in place
        auto outputs = sensitivity::run_ensemble(model, wx, factors, opt);
        benchmark::DoNotOptimize(outputs.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void bm_ensemble_serial(benchmark::State& state) { bm_ensemble(state, false); }
void bm_ensemble_parallel(benchmark::State& state) { bm_ensemble(state, true); }

}  // namespace

BENCHMARK(bm_mc_serial)->Arg(1 << 20)->Arg(1 << 23)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_mc_parallel)->Arg(1 << 20)->Arg(1 << 23)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_ensemble_serial)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_ensemble_parallel)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
