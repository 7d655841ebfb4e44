// SPDX-License-Identifier: Apache-2.0
//
// omnisim: site-specific millimeter-wave channel simulation
// Copyright (C) 2026 The omnisim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "omnisim/scenario.hpp"

#include <benchmark/benchmark.h>

#include <numbers>
#include <random>

using namespace omnisim;

namespace
{

struct Urban
{
    ScenarioConfig cfg;
    DigitalMap map;
    std::vector<UeResult> results;

    static const Urban &get()
    {
        static const Urban u = [] {
            ScenarioConfig cfg = load_scenario(OMNISIM_FIXTURE_DIR "/urban_scenario.json");
            DigitalMap map = load_map(cfg.map_path);
            Simulator sim(cfg, map);
            return Urban{cfg, std::move(map), sim.run(1)};
        }();
        return u;
    }
};

std::vector<Ray> random_rays(const DigitalMap &map, std::size_t count)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> x(map.bounds().min.x, map.bounds().max.x);
    std::uniform_real_distribution<double> y(map.bounds().min.y, map.bounds().max.y);
    std::uniform_real_distribution<double> a(0.0, 2.0 * std::numbers::pi);
    std::vector<Ray> rays;
    for (std::size_t i = 0; i < count; ++i)
        rays.push_back(Ray{{x(rng), y(rng)}, unit_from_angle(a(rng))});
    return rays;
}

void BM_NearestHitGrid(benchmark::State &state)
{
    const auto &map = Urban::get().map;
    const auto rays = random_rays(map, 1024);
    for (auto _ : state)
        for (const Ray &r : rays)
            benchmark::DoNotOptimize(map.nearest_hit(r, std::nullopt));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rays.size()));
}
BENCHMARK(BM_NearestHitGrid);

void BM_NearestHitLinear(benchmark::State &state)
{
    const auto &map = Urban::get().map;
    const auto rays = random_rays(map, 1024);
    for (auto _ : state)
        for (const Ray &r : rays)
            benchmark::DoNotOptimize(map.nearest_hit_linear(r, std::nullopt));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rays.size()));
}
BENCHMARK(BM_NearestHitLinear);

void BM_Fsbr(benchmark::State &state)
{
    const Urban &u = Urban::get();
    TracerConfig cfg = u.cfg.tracer;
    cfg.warm_start = state.range(0) != 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(fsbr_trace(u.map, cfg));
    state.SetLabel(cfg.warm_start ? "warm" : "naive");
}
BENCHMARK(BM_Fsbr)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

const std::vector<SubRay> &busiest_subrays()
{
    static const std::vector<SubRay> rays = [] {
        const auto &results = Urban::get().results;
        const UeResult *best = &results.front();
        for (const UeResult &r : results)
            if (r.subrays.size() > best->subrays.size())
                best = &r;
        return best->subrays;
    }();
    return rays;
}

void BM_Synthesize(benchmark::State &state)
{
    const Urban &u = Urban::get();
    OfdmGrid grid = u.cfg.grid;
    grid.subcarrier_count = static_cast<int>(state.range(0));
    const auto &rays = busiest_subrays();
    for (auto _ : state)
        benchmark::DoNotOptimize(synthesize(rays, u.cfg.rx_array(), u.cfg.tx_array(), grid, u.cfg.wave()));
    state.SetLabel(std::to_string(rays.size()) + " sub-rays");
}
BENCHMARK(BM_Synthesize)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_PowerFromTensor(benchmark::State &state)
{
    const Urban &u = Urban::get();
    OfdmGrid grid = u.cfg.grid;
    grid.subcarrier_count = static_cast<int>(state.range(0));
    const auto &rays = busiest_subrays();
    for (auto _ : state)
        benchmark::DoNotOptimize(
            channel_power(synthesize(rays, u.cfg.rx_array(), u.cfg.tx_array(), grid, u.cfg.wave())));
}
BENCHMARK(BM_PowerFromTensor)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_PowerGram(benchmark::State &state)
{
    const Urban &u = Urban::get();
    OfdmGrid grid = u.cfg.grid;
    grid.subcarrier_count = static_cast<int>(state.range(0));
    const auto &rays = busiest_subrays();
    for (auto _ : state)
        benchmark::DoNotOptimize(channel_power(rays, u.cfg.rx_array(), u.cfg.tx_array(), grid, u.cfg.wave()));
}
BENCHMARK(BM_PowerGram)->Arg(64)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
