#include "graspkb/metrics.hpp"
#include "graspkb/patches.hpp"
#include "graspkb/random.hpp"
#include "graspkb/shapes.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace graspkb;

void BM_RectHausdorff(benchmark::State& state)
{
    RegionRect const a{0.4, 0.5, 0.2, 0.1, 0.3};
    RegionRect const b{0.45, 0.52, 0.18, 0.12, -0.2};
    auto const samples = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(rect_hausdorff(a, b, samples));
    }
}
BENCHMARK(BM_RectHausdorff)->Arg(16)->Arg(64)->Arg(256);

void BM_Auc(benchmark::State& state)
{
    Rng rng(3);
    std::vector<ScoredLabel> scored(static_cast<std::size_t>(state.range(0)));
    for (auto& s : scored) {
        s.score = rng.uniform();
        s.positive = rng.bernoulli(0.3);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(auc(scored));
    }
}
BENCHMARK(BM_Auc)->Arg(1000)->Arg(100000);

void BM_ClusterMug(benchmark::State& state)
{
    MugOptions options;
    options.seed = 4;
    auto const mug = make_mug(options);
    KMeansOptions km;
    km.restarts = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        auto patches = cluster_patches(mug, 3, 5, km);
        benchmark::DoNotOptimize(patches.data());
    }
}
BENCHMARK(BM_ClusterMug)->Arg(1)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_PlaneFit(benchmark::State& state)
{
    auto const pts = make_plane_patch(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), 0.1, 0.05,
                                      static_cast<std::size_t>(state.range(0)), 0.001, 6);
    for (auto _ : state) {
        auto plane = fit_dominant_plane(pts, Vec3(0, 0, -1));
        benchmark::DoNotOptimize(plane.residual);
    }
}
BENCHMARK(BM_PlaneFit)->Arg(300)->Arg(3000);

} // namespace
