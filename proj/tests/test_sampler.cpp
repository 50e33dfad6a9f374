#include <cmath>
#include <memory>

#include <doctest.h>

#include "scorefuse/sampler.hpp"

using namespace scorefuse;

namespace {

std::shared_ptr<GaussianDenoiser> standard_scalar_denoiser() {
  return std::make_shared<GaussianDenoiser>(
      GaussianModel(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)));
}

CompositionConfig plain_convex() {
  CompositionConfig c;
  c.mode = CompositionMode::kConvex;
  c.s_schedule = [](int) { return 0.5; };
  return c;
}

}  // namespace

TEST_SUITE_BEGIN("sampler");

TEST_CASE("matrix sampling with independent per-entry models reduces to scalar runs") {
  // Identical row/column estimators built entrywise from one scalar model:
  // each entry must follow exactly the trajectory of a standalone scalar
  // integration seeded from the same per-entry stream, bit for bit.
  const int v = 2, f = 3;
  const auto base = standard_scalar_denoiser();
  const EntrywiseDenoiser video(base, f);
  const EntrywiseDenoiser multiview(base, v);
  const SigmaSchedule schedule = karras_sigmas(10, 0.01, 5.0, 7.0);
  const std::uint64_t seed = 123;

  const SampleResult res =
      sample_matrix(video, multiview, schedule, plain_convex(), {}, {v, f, 1}, seed);

  const RngRoot root(seed);
  for (int i = 0; i < v; ++i) {
    for (int j = 0; j < f; ++j) {
      Stream s = root.stream(StreamTag::kInitNoise, static_cast<std::uint64_t>(i),
                             static_cast<std::uint64_t>(j));
      const Eigen::VectorXd expected = pf_ode_sample(*base, schedule, s);
      CHECK(res.matrix.entry(i, j)[0] == expected[0]);
    }
  }
}

TEST_CASE("scalar integration pulls a unit gaussian toward its mean") {
  const auto base = standard_scalar_denoiser();
  const SigmaSchedule schedule = karras_sigmas(100, 0.002, 10.0, 7.0);
  Stream rng(601);
  double sum = 0.0, sum2 = 0.0;
  const int n = 2000;
  for (int k = 0; k < n; ++k) {
    Stream s(rng.next_u64());
    const double x = pf_ode_sample(*base, schedule, s)[0];
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.1);
  CHECK(std::abs(var - 1.0) < 0.12);
}

TEST_CASE("rollback accounting matches the configured extra steps") {
  const int v = 3, f = 4;
  const auto base = standard_scalar_denoiser();
  const EntrywiseDenoiser video(base, f);
  const EntrywiseDenoiser multiview(base, v);
  const SigmaSchedule schedule = karras_sigmas(50, 0.002, 80.0, 7.0);
  CompositionConfig comp = plain_convex();
  comp.n_rollback = 5;
  comp.rollback_repeats = 2;

  const SampleResult res =
      sample_matrix(video, multiview, schedule, comp, {}, {v, f, 1}, 42);
  CHECK(res.run.composed_steps() == 55);
  for (const StepRecord& step : res.run.steps) CHECK(step.denoiser_calls == v + f);
  CHECK(res.run.total_denoiser_calls == 55LL * (v + f));
}

TEST_CASE("renoise adds nothing when the levels coincide") {
  LatentMatrix x(2, 2, 3);
  Stream rng(602);
  x.data() = rng.normal_vector(x.size());
  const RngRoot root(603);
  const LatentMatrix out = vrs_renoise(x, 1.5, 1.5, root, 0, 0);
  CHECK(out.data() == x.data());
}

TEST_CASE("renoise rejects inverted levels") {
  LatentMatrix x(1, 1, 1);
  const RngRoot root(604);
  CHECK_THROWS(vrs_renoise(x, 1.0, 2.0, root, 0, 0));
}

TEST_CASE("renoise magnitude matches the as-written rule") {
  // sigma_hi = 2, sigma_lo = 1: added noise has std (2 - 1) = 1.
  LatentMatrix zero(100, 100, 10);
  const RngRoot root(605);
  const LatentMatrix out = vrs_renoise(zero, 2.0, 1.0, root, 0, 0, false);
  const double n = static_cast<double>(out.data().size());
  const double std_dev = std::sqrt(out.data().squaredNorm() / n);
  CHECK(std::abs(std_dev - 1.0) < 0.02);
}

TEST_CASE("variance-matched renoise magnitude is the root of the variance gap") {
  // sqrt(2^2 - 1^2) = sqrt(3).
  LatentMatrix zero(100, 100, 10);
  const RngRoot root(606);
  const LatentMatrix out = vrs_renoise(zero, 2.0, 1.0, root, 0, 0, true);
  const double n = static_cast<double>(out.data().size());
  const double std_dev = std::sqrt(out.data().squaredNorm() / n);
  CHECK(std::abs(std_dev - std::sqrt(3.0)) < 0.03);
}

TEST_CASE("renoise streams are keyed by step, repeat, and entry") {
  LatentMatrix zero(2, 2, 4);
  const RngRoot root(607);
  const LatentMatrix a = vrs_renoise(zero, 2.0, 1.0, root, 3, 1);
  const LatentMatrix b = vrs_renoise(zero, 2.0, 1.0, root, 3, 1);
  const LatentMatrix c = vrs_renoise(zero, 2.0, 1.0, root, 3, 0);
  CHECK(a.data() == b.data());
  CHECK(a.data() != c.data());
  CHECK(a.entry(0, 0) != a.entry(1, 1));
}

TEST_CASE("two runs with one seed agree bit-exact and different seeds differ") {
  const int v = 2, f = 2;
  const auto base = standard_scalar_denoiser();
  const EntrywiseDenoiser video(base, f);
  const EntrywiseDenoiser multiview(base, v);
  const SigmaSchedule schedule = karras_sigmas(12, 0.01, 5.0, 7.0);
  CompositionConfig comp = plain_convex();
  comp.n_rollback = 3;
  comp.rollback_repeats = 2;

  const SampleResult a = sample_matrix(video, multiview, schedule, comp, {}, {v, f, 1}, 9);
  const SampleResult b = sample_matrix(video, multiview, schedule, comp, {}, {v, f, 1}, 9);
  const SampleResult c = sample_matrix(video, multiview, schedule, comp, {}, {v, f, 1}, 10);
  CHECK(a.matrix.data() == b.matrix.data());
  CHECK(a.matrix.data() != c.matrix.data());
}

TEST_CASE("conditioned entries appear verbatim in the output") {
  const int v = 2, f = 3;
  const auto base = standard_scalar_denoiser();
  const EntrywiseDenoiser video(base, f);
  const EntrywiseDenoiser multiview(base, v);
  const SigmaSchedule schedule = karras_sigmas(10, 0.01, 5.0, 7.0);
  ConditionSet conds;
  conds.entries[{0, 0}] = Eigen::VectorXd::Constant(1, 0.75);
  conds.entries[{1, 2}] = Eigen::VectorXd::Constant(1, -1.5);

  const SampleResult res =
      sample_matrix(video, multiview, schedule, plain_convex(), conds, {v, f, 1}, 77);
  CHECK(res.matrix.entry(0, 0)[0] == 0.75);
  CHECK(res.matrix.entry(1, 2)[0] == -1.5);
}

TEST_CASE("snapshots capture the raw trajectory per step and repeat") {
  const int v = 2, f = 2;
  const auto base = standard_scalar_denoiser();
  const EntrywiseDenoiser video(base, f);
  const EntrywiseDenoiser multiview(base, v);
  const SigmaSchedule schedule = karras_sigmas(8, 0.01, 5.0, 7.0);
  CompositionConfig comp = plain_convex();
  comp.n_rollback = 2;
  comp.rollback_repeats = 3;
  SampleOptions opts;
  opts.record_snapshots = true;

  const SampleResult res =
      sample_matrix(video, multiview, schedule, comp, {}, {v, f, 1}, 5, opts);
  REQUIRE(res.run.snapshots.size() == res.run.steps.size());
  for (std::size_t k = 0; k < res.run.snapshots.size(); ++k) {
    CHECK(res.run.snapshots[k].step == res.run.steps[k].step);
    CHECK(res.run.snapshots[k].repeat == res.run.steps[k].repeat);
    CHECK(res.run.snapshots[k].sigma == res.run.steps[k].sigma);
    CHECK(res.run.snapshots[k].state.size() == 4);
  }
}

TEST_CASE("invalid sampler configurations are rejected") {
  const auto base = standard_scalar_denoiser();
  const EntrywiseDenoiser video(base, 2);
  const EntrywiseDenoiser multiview(base, 2);
  const SigmaSchedule schedule = karras_sigmas(4, 0.01, 5.0, 7.0);

  CompositionConfig too_many = plain_convex();
  too_many.n_rollback = 5;
  too_many.rollback_repeats = 2;
  CHECK_THROWS(sample_matrix(video, multiview, schedule, too_many, {}, {2, 2, 1}, 1));

  CompositionConfig bad_repeats = plain_convex();
  bad_repeats.rollback_repeats = 0;
  CHECK_THROWS(sample_matrix(video, multiview, schedule, bad_repeats, {}, {2, 2, 1}, 1));

  CompositionConfig exact = plain_convex();
  exact.mode = CompositionMode::kExact;
  CHECK_THROWS(sample_matrix(video, multiview, schedule, exact, {}, {2, 2, 1}, 1));

  CHECK_THROWS(sample_matrix(video, multiview, schedule, plain_convex(), {}, {3, 3, 1}, 1));
}

TEST_SUITE_END();
