#include "mgomea/archive.hpp"
#include "mgomea/clustering.hpp"
#include "mgomea/engine.hpp"
#include "mgomea/linkage.hpp"
#include "mgomea/objectives.hpp"

#include <benchmark/benchmark.h>

using namespace mgomea;

namespace {

GenotypeConfig configFor(const Dataset& data, int height, int trees)
{
    RunConfig rc;
    rc.genotype.treeHeight = height;
    rc.genotype.treeCount = trees;
    return genotypeFor(rc, data);
}

std::vector<ObjectiveVector> cloud(std::size_t n, Rng& rng)
{
    std::vector<ObjectiveVector> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({ { rng.uniform01(), std::floor(rng.uniform(1, 500)) }, 1, true });
    }
    return out;
}

} // namespace

static void BM_Evaluate(benchmark::State& state)
{
    auto data = generateSynthetic(1, static_cast<std::size_t>(state.range(0)), 0);
    TemplateLayout layout(4);
    auto cfg = configFor(data, 4, 4);
    Rng rng(1);
    auto pop = initializePopulation(64, cfg, layout, rng);
    ObjectiveEvaluator evaluator(data, layout, { ObjectiveKind::R2, ObjectiveKind::Size }, true);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluator(pop[i++ % pop.size()]));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Evaluate)->Arg(100)->Arg(1000)->Arg(10000);

static void BM_LearnFos(benchmark::State& state)
{
    auto data = generateSynthetic(1, 100, 0);
    TemplateLayout layout(4);
    auto cfg = configFor(data, 4, 4);
    Rng rng(2);
    auto pop = initializePopulation(static_cast<std::size_t>(state.range(0)), cfg, layout, rng);
    std::vector<const Genotype*> ptrs;
    for (auto const& g : pop) {
        ptrs.push_back(&g);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(combinedFos(ptrs, 4, rng));
    }
}
BENCHMARK(BM_LearnFos)->Arg(512)->Arg(4096);

static void BM_Clustering(benchmark::State& state)
{
    Rng rng(3);
    auto objs = cloud(static_cast<std::size_t>(state.range(1)), rng);
    auto strategy = static_cast<ClusteringStrategy>(state.range(0));
    state.SetLabel(std::string(strategyName(strategy)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(cluster(strategy, objs, 5, rng));
    }
}
BENCHMARK(BM_Clustering)
    ->ArgsProduct({ { static_cast<long>(ClusteringStrategy::Original), static_cast<long>(ClusteringStrategy::Bkrr),
                        static_cast<long>(ClusteringStrategy::Bkmrr) },
        { 512, 4096 } });

static void BM_ArchiveInsert(benchmark::State& state)
{
    Rng rng(4);
    auto objs = cloud(10000, rng);
    Genotype g(1, 1);
    for (auto _ : state) {
        ElitistArchive archive;
        for (std::size_t i = 0; i < objs.size(); ++i) {
            if (i % 100 == 0) {
                archive.rebuildGrid();
            }
            archive.tryAdd(objs[i], g);
        }
        benchmark::DoNotOptimize(archive.size());
    }
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_ArchiveInsert);

static void BM_Hypervolume(benchmark::State& state)
{
    Rng rng(5);
    std::vector<std::array<double, 2>> pts(static_cast<std::size_t>(state.range(0)));
    for (auto& p : pts) {
        p = { rng.uniform01(), rng.uniform01() };
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(hypervolume2d(pts));
    }
}
BENCHMARK(BM_Hypervolume)->Arg(100)->Arg(10000);

static void BM_Generations(benchmark::State& state)
{
    auto data = generateSynthetic(1, 500, 0);
    RunConfig rc;
    rc.mode = state.range(0) == 0 ? Mode::SingleObjective : Mode::MultiObjective;
    rc.clustering = rc.mode == Mode::SingleObjective ? ClusteringStrategy::None : ClusteringStrategy::Bkmrr;
    rc.populationSize = 256;
    rc.maxGenerations = 5;
    state.SetLabel(std::string(modeName(rc.mode)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(run(rc, data).evaluations);
    }
}
BENCHMARK(BM_Generations)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
