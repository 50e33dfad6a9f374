#include <cmath>

#include <doctest.h>

#include "scorefuse/schedule.hpp"

using namespace scorefuse;

TEST_SUITE_BEGIN("schedule");

TEST_CASE("three-step schedule hits the independently computed midpoint") {
  // (80^{1/7} + (1/2) (0.1^{1/7} - 80^{1/7}))^7, evaluated with extended
  // precision and frozen here as a regression oracle.
  const SigmaSchedule sched = karras_sigmas(3, 0.1, 80.0, 7.0);
  REQUIRE(sched.levels.size() == 4);
  CHECK(sched.levels[0] == 80.0);
  CHECK(std::abs(sched.levels[1] - 6.1046802393898646532) <
        1e-14 * 6.1046802393898646532);
  CHECK(sched.levels[2] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(sched.levels[3] == 0.0);
}

TEST_CASE("schedule is strictly decreasing with an exact zero terminal") {
  const SigmaSchedule sched = karras_sigmas(50, 0.002, 80.0, 7.0);
  REQUIRE(sched.n_steps() == 50);
  CHECK(sched.valid());
  CHECK(sched.sigma_max() == 80.0);
  for (std::size_t i = 0; i + 1 < sched.levels.size(); ++i) {
    CHECK(sched.levels[i] > sched.levels[i + 1]);
  }
  CHECK(sched.levels.back() == 0.0);
}

TEST_CASE("single-step schedule degenerates to max then zero") {
  const SigmaSchedule sched = karras_sigmas(1, 0.002, 80.0, 7.0);
  REQUIRE(sched.levels.size() == 2);
  CHECK(sched.levels[0] == 80.0);
  CHECK(sched.levels[1] == 0.0);
}

TEST_CASE("rho = 1 gives a linear grid between the endpoints") {
  const SigmaSchedule sched = karras_sigmas(5, 1.0, 5.0, 1.0);
  for (int i = 0; i < 5; ++i) {
    CHECK(sched.levels[i] == doctest::Approx(5.0 - i).epsilon(1e-14));
  }
}

TEST_CASE("perturb at sigma zero copies the input bit-exact") {
  Stream rng(11);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(6, -1.0, 1.0);
  const Eigen::VectorXd y = perturb(x, 0.0, 1.0, rng);
  CHECK(y == x);
  // No randomness was consumed.
  Stream fresh(11);
  CHECK(rng.next_u64() == fresh.next_u64());
}

TEST_CASE("perturb matches the requested first and second moments") {
  Stream rng(12);
  const int n = 100000;
  const Eigen::VectorXd base = Eigen::VectorXd::Constant(n, 3.0);
  const Eigen::VectorXd y = perturb(base, 2.0, 0.5, rng);
  const double mean = y.mean();
  const double var = (y.array() - mean).square().mean();
  CHECK(std::abs(mean - 1.5) < 0.02);       // alpha * 3
  CHECK(std::abs(var - 4.0) < 0.08);        // sigma^2
}

TEST_SUITE_END();
