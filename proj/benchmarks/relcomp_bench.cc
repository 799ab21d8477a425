#include <benchmark/benchmark.h>

#include "relcomp/active_session.h"
#include "relcomp/dataset.h"
#include "relcomp/evaluation.h"
#include "relcomp/forest.h"
#include "relcomp/info_gain.h"
#include "relcomp/kmeans.h"
#include "relcomp/metric.h"
#include "relcomp/oracle.h"
#include "relcomp/pool.h"

namespace relcomp {
namespace {

PreparedData Bench(int per_class) {
  return PrepareData(MakeSyntheticGaussians({3, per_class, 6, 2, 4.0, 7}), 0.0, 0, true);
}

ClassProbs Probs(const FeatureMatrix& x) {
  Clustering c = KMeans(x, MetricWeights::Identity(static_cast<int>(x.cols())),
                        {.num_clusters = 3, .seed = 1});
  return EstimateClassProbs(x, c.assignments, 3, {.seed = 2});
}

// Scoring the default pool (100 n candidates) once: the per-query cost of
// the info policy.
void BM_ScorePool(benchmark::State& state) {
  PreparedData p = Bench(static_cast<int>(state.range(0)));
  ClassProbs cp = Probs(p.train.features);
  Pool pool = SamplePool(p.train.size(), {.pool_factor = 100, .seed = 3}, {});
  for (auto _ : state) benchmark::DoNotOptimize(ScorePool(pool, cp));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pool.size()));
}
BENCHMARK(BM_ScorePool)->Arg(20)->Arg(40)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_InfoGain(benchmark::State& state) {
  PreparedData p = Bench(40);
  ClassProbs cp = Probs(p.train.features);
  const Triplet t{0, 50, 100};
  for (auto _ : state) benchmark::DoNotOptimize(InfoGain(cp, t));
}
BENCHMARK(BM_InfoGain);

void BM_LearnMetric(benchmark::State& state) {
  PreparedData p = Bench(40);
  SimulatedOracle oracle(*p.train.labels, 0.0, 0);
  std::vector<Constraint> cs;
  for (const auto& e : BootstrapYesNoTriplets(oracle, p.train.size(),
                                              static_cast<int>(state.range(0)), 1))
    cs.push_back({e.triplet, e.answer});
  for (auto _ : state) benchmark::DoNotOptimize(LearnMetric(p.train.features, cs, {}));
}
BENCHMARK(BM_LearnMetric)->Arg(10)->Arg(40)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_KMeans(benchmark::State& state) {
  PreparedData p = Bench(static_cast<int>(state.range(0)));
  MetricWeights w = MetricWeights::Identity(6);
  for (auto _ : state)
    benchmark::DoNotOptimize(KMeans(p.train.features, w, {.num_clusters = 3, .seed = 1}));
}
BENCHMARK(BM_KMeans)->Arg(40)->Arg(200)->Unit(benchmark::kMicrosecond);

void BM_ForestOutOfBag(benchmark::State& state) {
  PreparedData p = Bench(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        EstimateClassProbs(p.train.features, *p.train.labels, 3, {.num_trees = 50, .seed = 2}));
}
BENCHMARK(BM_ForestOutOfBag)->Arg(40)->Arg(200)->Unit(benchmark::kMillisecond);

// One full loop iteration: relearn, cluster, forest, score, select.
void BM_SessionStep(benchmark::State& state) {
  PreparedData p = Bench(40);
  SimulatedOracle oracle(*p.train.labels, 0.0, 0);
  auto initial = BootstrapYesNoTriplets(oracle, p.train.size(), 2, 1);
  LoopConfig config;
  config.num_classes = 3;
  config.selection.budget = 1 << 20;
  for (auto _ : state) {
    state.PauseTiming();
    ActiveSession s = ActiveSession::StartWithInitial(p.train.features, config, initial);
    const Triplet t = *s.pending();
    state.ResumeTiming();
    s.Submit(oracle.Respond(t, 2), "simulated", 2);
    benchmark::DoNotOptimize(s.pending());
  }
}
BENCHMARK(BM_SessionStep)->Unit(benchmark::kMillisecond);

void BM_TripletAccuracy(benchmark::State& state) {
  PreparedData p = Bench(static_cast<int>(state.range(0)));
  MetricWeights w = MetricWeights::Identity(6);
  for (auto _ : state) benchmark::DoNotOptimize(TripletAccuracy(w, p.train, 200000, 1));
}
BENCHMARK(BM_TripletAccuracy)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace relcomp

BENCHMARK_MAIN();
