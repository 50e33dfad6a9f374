#include <memory>
#include <vector>

#include <benchmark/benchmark.h>

#include "scorefuse/sampler.hpp"
#include "scorefuse/stats.hpp"

using namespace scorefuse;

namespace {

Eigen::MatrixXd random_spd(Stream& rng, int d) {
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = rng.next_normal();
  return a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d);
}

void BM_GaussianScore(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Stream rng(1);
  const GaussianModel model(rng.normal_vector(d), random_spd(rng, d));
  const Eigen::VectorXd x = rng.normal_vector(d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.score(x));
  }
}
BENCHMARK(BM_GaussianScore)->Arg(4)->Arg(16)->Arg(64);

void BM_GmmDenoise(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  Stream rng(2);
  std::vector<GaussianModel> comps;
  std::vector<double> weights(k, 1.0 / k);
  for (int c = 0; c < k; ++c) comps.emplace_back(3.0 * rng.normal_vector(4), random_spd(rng, 4));
  const GmmDenoiser den(GmmModel(weights, std::move(comps)));
  const Eigen::VectorXd x = rng.normal_vector(4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(den.evaluate(x, 1.5));
  }
}
BENCHMARK(BM_GmmDenoise)->Arg(2)->Arg(8)->Arg(32);

void BM_BuildPivotTree(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    state.PauseTiming();
    Stream rng(3);
    const PivotTreeSpec spec = random_pivot_tree_spec(rng, n, n, 2, 0.5);
    state.ResumeTiming();
    benchmark::DoNotOptimize(build_pivot_tree(spec));
  }
}
BENCHMARK(BM_BuildPivotTree)->Arg(3)->Arg(5)->Arg(8);

void BM_MatrixDirection(benchmark::State& state) {
  const int v = static_cast<int>(state.range(0));
  const int f = v + 1;
  const int d = 2;
  const auto base = std::make_shared<GaussianDenoiser>(
      GaussianModel(Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d)));
  const EntrywiseDenoiser video(base, f);
  const EntrywiseDenoiser multiview(base, v);
  LatentMatrix x(v, f, d);
  Stream rng(4);
  x.data() = rng.normal_vector(x.size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(matrix_direction(x, video, multiview, 1.0, 0.5));
  }
}
BENCHMARK(BM_MatrixDirection)->Arg(3)->Arg(6)->Arg(12);

void BM_SampleMatrix(benchmark::State& state) {
  const int n_steps = static_cast<int>(state.range(0));
  const int v = 4, f = 4;
  const auto base = std::make_shared<GaussianDenoiser>(
      GaussianModel(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)));
  const EntrywiseDenoiser video(base, f);
  const EntrywiseDenoiser multiview(base, v);
  const SigmaSchedule schedule = karras_sigmas(n_steps, 0.002, 10.0, 7.0);
  CompositionConfig comp;
  comp.n_rollback = 5;
  comp.rollback_repeats = 2;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_matrix(video, multiview, schedule, comp, {}, {v, f, 1}, ++seed));
  }
}
BENCHMARK(BM_SampleMatrix)->Arg(10)->Arg(20)->Arg(50);

void BM_EnergyDistance(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Stream rng(5);
  std::vector<Eigen::VectorXd> a, b;
  for (int i = 0; i < n; ++i) a.push_back(rng.normal_vector(4));
  for (int i = 0; i < n; ++i) b.push_back(rng.normal_vector(4));
  for (auto _ : state) {
    benchmark::DoNotOptimize(energy_distance(a, b));
  }
}
BENCHMARK(BM_EnergyDistance)->Arg(50)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
