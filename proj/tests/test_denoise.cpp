#include <cmath>
#include <memory>
#include <vector>

#include <doctest.h>

#include "scorefuse/denoise.hpp"

using namespace scorefuse;

namespace {

Eigen::MatrixXd random_spd(Stream& rng, int d) {
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = rng.next_normal();
  return a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d);
}

GmmModel scalar_mixture(std::vector<double> weights, std::vector<double> means, double std_dev) {
  std::vector<GaussianModel> comps;
  for (double m : means) {
    comps.emplace_back(Eigen::VectorXd::Constant(1, m),
                       std_dev * std_dev * Eigen::MatrixXd::Identity(1, 1));
  }
  return GmmModel(std::move(weights), std::move(comps));
}

// Posterior mean E[x0 | x, sigma] of a scalar mixture by direct Simpson
// quadrature of the Bayes integral, independent of the analytic formula.
double quadrature_posterior_mean(const GmmModel& model, double x, double sigma) {
  const double lo = -12.0, hi = 12.0;
  const int n = 4000;  // even
  const double h = (hi - lo) / n;
  const auto integrand = [&](double x0, bool weighted) {
    double density = 0.0;
    for (std::size_t k = 0; k < model.weights().size(); ++k) {
      const double m = model.components()[k].mean()[0];
      const double v = model.components()[k].covariance()(0, 0);
      density += model.weights()[k] / std::sqrt(2.0 * M_PI * v) *
                 std::exp(-0.5 * (x0 - m) * (x0 - m) / v);
    }
    const double lik = std::exp(-0.5 * (x - x0) * (x - x0) / (sigma * sigma));
    return (weighted ? x0 : 1.0) * density * lik;
  };
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x0 = lo + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    num += w * integrand(x0, true);
    den += w * integrand(x0, false);
  }
  return num / den;
}

}  // namespace

TEST_SUITE_BEGIN("denoise");

TEST_CASE("gaussian denoiser satisfies the score identity exactly") {
  Stream rng(401);
  for (int rep = 0; rep < 50; ++rep) {
    const int d = 1 + rep % 4;
    const GaussianModel model(rng.normal_vector(d), random_spd(rng, d));
    const GaussianDenoiser den(model);
    const double sigma = 0.2 + 0.5 * (rep % 3);
    const Eigen::VectorXd x = 3.0 * rng.normal_vector(d);
    const Eigen::VectorXd lhs = score_of(den, x, sigma);
    const Eigen::VectorXd rhs = model.noised(sigma).score(x);
    CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() <
          1e-10 * (1.0 + rhs.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("mixture denoiser satisfies the score identity") {
  Stream rng(402);
  for (int rep = 0; rep < 50; ++rep) {
    const int d = 1 + rep % 2;
    std::vector<GaussianModel> comps;
    comps.emplace_back(rng.normal_vector(d), random_spd(rng, d));
    comps.emplace_back(4.0 * rng.normal_vector(d), random_spd(rng, d));
    comps.emplace_back(-2.0 * rng.normal_vector(d), random_spd(rng, d));
    const GmmModel model({0.5, 0.3, 0.2}, std::move(comps));
    const GmmDenoiser den(model);
    const double sigma = 0.3 + 0.4 * (rep % 4);
    const Eigen::VectorXd x = 3.0 * rng.normal_vector(d);
    const Eigen::VectorXd lhs = score_of(den, x, sigma);
    const Eigen::VectorXd rhs = model.score(x, sigma);
    CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() <
          1e-8 * (1.0 + rhs.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("mixture posterior mean matches direct quadrature") {
  const GmmModel model = scalar_mixture({0.7, 0.3}, {-3.0, 3.0}, 0.5);
  const GmmDenoiser den(model);
  for (double x : {-4.0, -1.0, 0.0, 0.4, 2.5}) {
    for (double sigma : {0.5, 1.5, 4.0}) {
      const double expected = quadrature_posterior_mean(model, x, sigma);
      const double got = den.evaluate(Eigen::VectorXd::Constant(1, x), sigma)[0];
      CHECK(std::abs(got - expected) < 1e-6);
    }
  }
}

TEST_CASE("ode direction is the negated sigma-scaled score") {
  Stream rng(403);
  const GaussianModel model(rng.normal_vector(2), random_spd(rng, 2));
  const GaussianDenoiser den(model);
  const Eigen::VectorXd x = rng.normal_vector(2);
  const Eigen::VectorXd dir = ode_direction(den, x, 1.7);
  const Eigen::VectorXd score = score_of(den, x, 1.7);
  CHECK((dir + 1.7 * score).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("score helpers reject non-positive sigma") {
  Stream rng(404);
  const GaussianDenoiser den(GaussianModel(rng.normal_vector(1), random_spd(rng, 1)));
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
  CHECK_THROWS(score_of(den, x, 0.0));
  CHECK_THROWS(ode_direction(den, x, -1.0));
}

TEST_CASE("entrywise denoiser equals blockwise application of the base") {
  Stream rng(405);
  const auto base = std::make_shared<GaussianDenoiser>(
      GaussianModel(rng.normal_vector(2), random_spd(rng, 2)));
  const EntrywiseDenoiser wide(base, 3);
  REQUIRE(wide.dim() == 6);
  const Eigen::VectorXd x = rng.normal_vector(6);
  const Eigen::VectorXd y = wide.evaluate(x, 0.8);
  for (int b = 0; b < 3; ++b) {
    const Eigen::VectorXd block = base->evaluate(x.segment(2 * b, 2), 0.8);
    CHECK(y.segment(2 * b, 2) == block);
  }
}

TEST_CASE("counting decorator tallies every evaluation") {
  Stream rng(406);
  const GaussianDenoiser base(GaussianModel(rng.normal_vector(1), random_spd(rng, 1)));
  const CountingDenoiser counted(base);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
  for (int i = 0; i < 7; ++i) (void)counted.evaluate(x, 1.0);
  CHECK(counted.calls() == 7);
}

TEST_SUITE_END();
