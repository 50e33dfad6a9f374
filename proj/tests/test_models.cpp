#include <cmath>
#include <vector>

#include <doctest.h>

#include "scorefuse/models.hpp"

using namespace scorefuse;

namespace {

Eigen::MatrixXd random_spd(Stream& rng, int d) {
  const Eigen::MatrixXd a = [&] {
    Eigen::MatrixXd m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = rng.next_normal();
    return m;
  }();
  return a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d);
}

// Central finite difference of a log-density.
template <typename F>
Eigen::VectorXd fd_gradient(const F& logp, const Eigen::VectorXd& x, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Eigen::VectorXd hi = x, lo = x;
    hi[k] += h;
    lo[k] -= h;
    g[k] = (logp(hi) - logp(lo)) / (2.0 * h);
  }
  return g;
}

PivotTreeSpec uniform_half_spec() {
  // 2x2 grid, scalar entries, every structural coefficient 0.5 and every
  // innovation variance 1.
  PivotTreeSpec spec;
  spec.v = 2;
  spec.f = 2;
  spec.d = 1;
  spec.pivot = {0, 0};
  spec.pivot_mean = Eigen::VectorXd::Zero(1);
  spec.pivot_cov = Eigen::MatrixXd::Identity(1, 1);
  const Eigen::MatrixXd half = 0.5 * Eigen::MatrixXd::Identity(1, 1);
  const Eigen::MatrixXd unit = Eigen::MatrixXd::Identity(1, 1);
  spec.row_coeffs[1] = half;
  spec.col_coeffs[1] = half;
  spec.rest_coeffs[{1, 1}] = half;
  spec.noise_vars[{0, 1}] = unit;
  spec.noise_vars[{1, 0}] = unit;
  spec.noise_vars[{1, 1}] = unit;
  return spec;
}

}  // namespace

TEST_SUITE_BEGIN("models");

TEST_CASE("gaussian score equals the finite-difference log-density gradient") {
  Stream rng(301);
  for (int rep = 0; rep < 20; ++rep) {
    const int d = 1 + rep % 4;
    const GaussianModel model(rng.normal_vector(d), random_spd(rng, d));
    const Eigen::VectorXd x = 2.0 * rng.normal_vector(d);
    const Eigen::VectorXd fd =
        fd_gradient([&](const Eigen::VectorXd& p) { return model.log_density(p); }, x);
    CHECK((model.score(x) - fd).lpNorm<Eigen::Infinity>() < 1e-6);
  }
}

TEST_CASE("noised gaussian adds sigma^2 on the diagonal only") {
  Stream rng(302);
  const GaussianModel model(rng.normal_vector(3), random_spd(rng, 3));
  const GaussianModel noised = model.noised(2.0);
  CHECK(noised.mean() == model.mean());
  const Eigen::MatrixXd diff = noised.covariance() - model.covariance();
  CHECK((diff - 4.0 * Eigen::MatrixXd::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("degenerate covariances are rejected") {
  const Eigen::VectorXd mu = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(GaussianModel(mu, Eigen::MatrixXd::Zero(2, 2)), DegenerateModelError);
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.3, -0.3, 1.0;
  CHECK_THROWS_AS(GaussianModel(mu, asym), DegenerateModelError);
}

TEST_CASE("mixture score equals the finite-difference gradient of the noised log-density") {
  Stream rng(303);
  for (int rep = 0; rep < 10; ++rep) {
    const int d = 1 + rep % 2;
    std::vector<GaussianModel> comps;
    comps.emplace_back(rng.normal_vector(d), random_spd(rng, d));
    comps.emplace_back(3.0 * rng.normal_vector(d), random_spd(rng, d));
    const GmmModel model({0.6, 0.4}, std::move(comps));
    const Eigen::VectorXd x = 2.0 * rng.normal_vector(d);
    const double sigma = 0.5 + rep * 0.3;
    const Eigen::VectorXd fd = fd_gradient(
        [&](const Eigen::VectorXd& p) { return model.log_density(p, sigma); }, x);
    CHECK((model.score(x, sigma) - fd).lpNorm<Eigen::Infinity>() < 1e-6);
  }
}

TEST_CASE("assembled tree covariance matches the simulated structural model") {
  const PivotTreeSpec spec = uniform_half_spec();
  const MatrixGaussianModel model = build_pivot_tree(spec);
  REQUIRE(model.joint().dim() == 4);

  // Forward-simulate the structural equations and compare moments.
  Stream rng(304);
  const int n = 400000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(4, 4);
  Eigen::VectorXd mean_acc = Eigen::VectorXd::Zero(4);
  for (int r = 0; r < n; ++r) {
    Eigen::VectorXd z(4);  // flat order: (0,0), (0,1), (1,0), (1,1)
    const double x = rng.next_normal();
    z[0] = x;
    z[1] = 0.5 * x + rng.next_normal();
    z[2] = 0.5 * x + rng.next_normal();
    z[3] = 0.5 * z[2] + rng.next_normal();
    mean_acc += z;
    acc += z * z.transpose();
  }
  const Eigen::VectorXd mean = mean_acc / n;
  const Eigen::MatrixXd cov = acc / n - mean * mean.transpose();
  CHECK((cov - model.joint().covariance()).lpNorm<Eigen::Infinity>() < 0.02);
  CHECK((mean - model.joint().mean()).lpNorm<Eigen::Infinity>() < 0.02);
}

TEST_CASE("row and column branches are conditionally independent given the pivot") {
  const MatrixGaussianModel model = build_pivot_tree(uniform_half_spec());
  const Eigen::MatrixXd pc = model.partial_covariance({0, 1}, {1, 0}, {0, 0});
  CHECK(pc.lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("cross wiring destroys the conditional independence") {
  PivotTreeSpec spec = uniform_half_spec();
  spec.cross_coeffs[{1, 1}] = 0.7 * Eigen::MatrixXd::Identity(1, 1);
  const MatrixGaussianModel model = build_pivot_tree(spec);
  const Eigen::MatrixXd pc = model.partial_covariance({0, 1}, {1, 0}, {0, 0});
  CHECK(pc.lpNorm<Eigen::Infinity>() > 1e-3);
}

TEST_CASE("marginal selection returns the pivot prior") {
  const PivotTreeSpec spec = uniform_half_spec();
  const MatrixGaussianModel model = build_pivot_tree(spec);
  const EntryIndex pivot{0, 0};
  const GaussianModel m = model.marginal(std::span<const EntryIndex>(&pivot, 1));
  CHECK((m.mean() - spec.pivot_mean).norm() < 1e-12);
  CHECK((m.covariance() - spec.pivot_cov).norm() < 1e-12);
}

TEST_CASE("flat indexing round-trips") {
  const MatrixGaussianModel model = build_pivot_tree(uniform_half_spec());
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const EntryIndex e = model.entry_of(model.flat(i, j, 0));
      CHECK(e.view == i);
      CHECK(e.frame == j);
    }
  }
  CHECK_THROWS(model.flat(2, 0, 0));
}

TEST_CASE("randomized specs stay well-posed across noise levels") {
  RngRoot root(305);
  for (double noise : {0.0, 0.5, 2.0, 10.0}) {
    Stream rng = root.stream(StreamTag::kModel, static_cast<std::uint64_t>(noise * 10));
    const PivotTreeSpec spec = random_pivot_tree_spec(rng, 3, 4, 2, noise);
    const MatrixGaussianModel model = build_pivot_tree(spec);
    CHECK(model.joint().covariance().allFinite());
    const EntryIndex row_entry{spec.pivot.view, (spec.pivot.frame + 1) % 4};
    const EntryIndex col_entry{(spec.pivot.view + 1) % 3, spec.pivot.frame};
    const Eigen::MatrixXd pc = model.partial_covariance(row_entry, col_entry, spec.pivot);
    CHECK(pc.lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_SUITE_END();
