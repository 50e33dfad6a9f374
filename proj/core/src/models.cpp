#include "scorefuse/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace scorefuse {

namespace {
constexpr double kSymmetryTol = 1e-12;
constexpr double kMinFactorDiagonal = 1e-10;

double log_sum_exp(const std::vector<double>& v) {
  double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}
}  // namespace

GaussianModel::GaussianModel(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
    : mean_(std::move(mean)), cov_(std::move(covariance)) {
  if (cov_.rows() != cov_.cols() || cov_.rows() != mean_.size()) {
    throw std::invalid_argument("GaussianModel: mean/covariance dimension mismatch");
  }
  const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
    throw DegenerateModelError("GaussianModel: covariance is not symmetric");
  }
  llt_.compute(cov_);
  if (llt_.info() != Eigen::Success ||
      llt_.matrixL().toDenseMatrix().diagonal().minCoeff() < kMinFactorDiagonal) {
    throw DegenerateModelError("GaussianModel: covariance not (numerically) positive definite");
  }
  log_norm_ = -0.5 * static_cast<double>(dim()) * std::log(2.0 * std::numbers::pi) -
              llt_.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Eigen::VectorXd GaussianModel::score(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw std::invalid_argument("GaussianModel::score: dimension mismatch");
  return -llt_.solve(x - mean_);
}

double GaussianModel::log_density(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw std::invalid_argument("GaussianModel::log_density: dimension mismatch");
  Eigen::VectorXd delta = x - mean_;
  return log_norm_ - 0.5 * delta.dot(llt_.solve(delta));
}

Eigen::VectorXd GaussianModel::draw(Stream& rng) const {
  return mean_ + llt_.matrixL() * rng.normal_vector(dim());
}

GaussianModel GaussianModel::noised(double sigma) const {
  if (sigma < 0.0) throw std::invalid_argument("GaussianModel::noised: sigma must be non-negative");
  if (sigma == 0.0) return *this;
  Eigen::MatrixXd cov = cov_;
  cov.diagonal().array() += sigma * sigma;
  return GaussianModel(mean_, std::move(cov));
}

GmmModel::GmmModel(std::vector<double> weights, std::vector<GaussianModel> components)
    : weights_(std::move(weights)), components_(std::move(components)) {
  if (weights_.empty() || weights_.size() != components_.size()) {
    throw std::invalid_argument("GmmModel: weights/components size mismatch");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (w < 0.0) throw std::invalid_argument("GmmModel: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("GmmModel: weights must sum to 1");
  }
  for (const auto& c : components_) {
    if (c.dim() != components_.front().dim()) {
      throw std::invalid_argument("GmmModel: component dimension mismatch");
    }
  }
}

namespace {
// Per-component noised log densities (plus log weights) at x.
std::vector<double> noised_log_terms(const GmmModel& m, const Eigen::VectorXd& x, double sigma) {
  std::vector<double> terms(m.n_components());
  for (std::size_t k = 0; k < m.n_components(); ++k) {
    const GaussianModel noised = m.components()[k].noised(sigma);
    terms[k] = std::log(m.weights()[k]) + noised.log_density(x);
  }
  return terms;
}
}  // namespace

Eigen::VectorXd GmmModel::score(const Eigen::VectorXd& x, double sigma) const {
  if (x.size() != dim()) throw std::invalid_argument("GmmModel::score: dimension mismatch");
  const auto terms = noised_log_terms(*this, x, sigma);
  const double lse = log_sum_exp(terms);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(dim());
  for (std::size_t k = 0; k < n_components(); ++k) {
    const double r = std::exp(terms[k] - lse);
    s += r * components_[k].noised(sigma).score(x);
  }
  return s;
}

double GmmModel::log_density(const Eigen::VectorXd& x, double sigma) const {
  if (x.size() != dim()) throw std::invalid_argument("GmmModel::log_density: dimension mismatch");
  return log_sum_exp(noised_log_terms(*this, x, sigma));
}

Eigen::VectorXd GmmModel::posterior_mean(const Eigen::VectorXd& x, double sigma) const {
  if (x.size() != dim()) throw std::invalid_argument("GmmModel::posterior_mean: dimension mismatch");
  const auto terms = noised_log_terms(*this, x, sigma);
  const double lse = log_sum_exp(terms);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim());
  for (std::size_t k = 0; k < n_components(); ++k) {
    const double r = std::exp(terms[k] - lse);
    const GaussianModel& c = components_[k];
    const GaussianModel noised = c.noised(sigma);
    // mu_k + Sigma_k (Sigma_k + sigma^2 I)^{-1} (x - mu_k)
    out += r * (c.mean() + c.covariance() * noised.factorization().solve(x - c.mean()));
  }
  return out;
}

Eigen::VectorXd GmmModel::draw(Stream& rng) const {
  double u = rng.next_double();
  std::size_t k = 0;
  double acc = 0.0;
  for (; k + 1 < n_components(); ++k) {
    acc += weights_[k];
    if (u <= acc) break;
  }
  return components_[k].draw(rng);
}

MatrixGaussianModel::MatrixGaussianModel(int v, int f, int entry_dim, GaussianModel joint)
    : v_(v), f_(f), d_(entry_dim), joint_(std::move(joint)) {
  if (v_ < 1 || f_ < 1 || d_ < 1) {
    throw std::invalid_argument("MatrixGaussianModel: non-positive shape");
  }
  if (joint_.dim() != static_cast<Eigen::Index>(v_) * f_ * d_) {
    throw std::invalid_argument("MatrixGaussianModel: joint dimension != V*F*d");
  }
}

void MatrixGaussianModel::check_entry(EntryIndex e) const {
  if (e.view < 0 || e.view >= v_ || e.frame < 0 || e.frame >= f_) {
    throw std::out_of_range("MatrixGaussianModel: entry index out of range");
  }
}

EntryIndex MatrixGaussianModel::entry_of(Eigen::Index flat_index) const {
  if (flat_index < 0 || flat_index >= joint_.dim()) {
    throw std::out_of_range("MatrixGaussianModel: flat index out of range");
  }
  const Eigen::Index entry = flat_index / d_;
  return {static_cast<int>(entry / f_), static_cast<int>(entry % f_)};
}

GaussianModel MatrixGaussianModel::marginal(std::span<const EntryIndex> entries) const {
  if (entries.empty()) throw std::invalid_argument("MatrixGaussianModel::marginal: empty selection");
  std::vector<Eigen::Index> idx;
  idx.reserve(entries.size() * d_);
  for (EntryIndex e : entries) {
    const Eigen::Index base = entry_offset(e);
    for (int k = 0; k < d_; ++k) idx.push_back(base + k);
  }
  const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
  Eigen::VectorXd mean(m);
  Eigen::MatrixXd cov(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    mean[a] = joint_.mean()[idx[a]];
    for (Eigen::Index b = 0; b < m; ++b) cov(a, b) = joint_.covariance()(idx[a], idx[b]);
  }
  return GaussianModel(std::move(mean), std::move(cov));
}

Eigen::MatrixXd MatrixGaussianModel::partial_covariance(EntryIndex a, EntryIndex b,
                                                        EntryIndex given) const {
  if (a == b || a == given || b == given) {
    throw std::invalid_argument("MatrixGaussianModel::partial_covariance: indices must be distinct");
  }
  check_entry(a);
  check_entry(b);
  check_entry(given);
  const Eigen::Index oa = entry_offset(a), ob = entry_offset(b), og = entry_offset(given);
  const auto& S = joint_.covariance();
  Eigen::MatrixXd S_ab = S.block(oa, ob, d_, d_);
  Eigen::MatrixXd S_ag = S.block(oa, og, d_, d_);
  Eigen::MatrixXd S_gb = S.block(og, ob, d_, d_);
  Eigen::MatrixXd S_gg = S.block(og, og, d_, d_);
  Eigen::LLT<Eigen::MatrixXd> llt(S_gg);
  if (llt.info() != Eigen::Success) {
    throw DegenerateModelError("partial_covariance: conditioning block not positive definite");
  }
  return S_ab - S_ag * llt.solve(S_gb);
}

namespace {
void check_spd_block(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw DegenerateModelError(std::string("build_pivot_tree: non-PD innovation covariance (") +
                               what + ")");
  }
}
}  // namespace

MatrixGaussianModel build_pivot_tree(const PivotTreeSpec& spec) {
  const int v = spec.v, f = spec.f, d = spec.d;
  if (v < 1 || f < 1 || d < 1) throw std::invalid_argument("build_pivot_tree: non-positive shape");
  const int i0 = spec.pivot.view, j0 = spec.pivot.frame;
  if (i0 < 0 || i0 >= v || j0 < 0 || j0 >= f) {
    throw std::invalid_argument("build_pivot_tree: pivot out of range");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(v) * f * d;
  const auto block_of = [&](int i, int j) { return (static_cast<Eigen::Index>(i) * f + j) * d; };

  Eigen::MatrixXd coeff = Eigen::MatrixXd::Zero(n, n);   // B
  Eigen::MatrixXd innov = Eigen::MatrixXd::Zero(n, n);   // Omega (block diagonal)
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(n);      // exogenous means

  check_spd_block(spec.pivot_cov, "pivot prior");
  innov.block(block_of(i0, j0), block_of(i0, j0), d, d) = spec.pivot_cov;
  shift.segment(block_of(i0, j0), d) = spec.pivot_mean;

  for (int i = 0; i < v; ++i) {
    for (int j = 0; j < f; ++j) {
      if (i == i0 && j == j0) continue;
      const Eigen::MatrixXd& omega = spec.noise_vars.at({i, j});
      check_spd_block(omega, "entry innovation");
      innov.block(block_of(i, j), block_of(i, j), d, d) = omega;
      if (i == i0) {
        coeff.block(block_of(i, j), block_of(i0, j0), d, d) = spec.row_coeffs.at(j);
      } else if (j == j0) {
        coeff.block(block_of(i, j), block_of(i0, j0), d, d) = spec.col_coeffs.at(i);
      } else {
        coeff.block(block_of(i, j), block_of(i, j0), d, d) = spec.rest_coeffs.at({i, j});
      }
    }
  }
  // Optional row->column edges; these break the conditional independence at
  // the pivot and exist only for negative-control experiments.
  for (const auto& [key, m] : spec.cross_coeffs) {
    const auto [i, j] = key;
    if (i == i0 || j == j0) throw std::invalid_argument("build_pivot_tree: invalid cross edge");
    coeff.block(block_of(i, j0), block_of(i0, j), d, d) += m;
  }

  Eigen::MatrixXd id_minus_b = Eigen::MatrixXd::Identity(n, n) - coeff;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(id_minus_b);
  if (!lu.isInvertible()) {
    throw DegenerateModelError("build_pivot_tree: singular (I - B)");
  }
  Eigen::MatrixXd ainv = lu.inverse();
  Eigen::MatrixXd cov = ainv * innov * ainv.transpose();
  cov = 0.5 * (cov + cov.transpose());
  Eigen::VectorXd mean = ainv * shift;
  return MatrixGaussianModel(v, f, d, GaussianModel(std::move(mean), std::move(cov)));
}

PivotTreeSpec random_pivot_tree_spec(Stream& rng, int v, int f, int d, double noise_inflation,
                                     bool violate_assumption) {
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * rng.next_double(); };
  const auto random_coeff = [&]() {
    Eigen::MatrixXd m(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) m(a, b) = uniform(-0.6, 0.6) / d;
    return m;
  };
  const auto random_spd = [&]() {
    Eigen::MatrixXd w(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) w(a, b) = uniform(-0.5, 0.5);
    Eigen::MatrixXd s = w * w.transpose();
    s.diagonal().array() += uniform(0.5, 1.5) + noise_inflation * noise_inflation;
    return s;
  };

  PivotTreeSpec spec;
  spec.v = v;
  spec.f = f;
  spec.d = d;
  spec.pivot = {static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(v)),
                static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(f))};
  spec.pivot_mean = Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return uniform(-1.0, 1.0); });
  spec.pivot_cov = random_spd();
  for (int j = 0; j < f; ++j) {
    if (j != spec.pivot.frame) spec.row_coeffs[j] = random_coeff();
  }
  for (int i = 0; i < v; ++i) {
    if (i != spec.pivot.view) spec.col_coeffs[i] = random_coeff();
  }
  for (int i = 0; i < v; ++i) {
    for (int j = 0; j < f; ++j) {
      if (i == spec.pivot.view && j == spec.pivot.frame) continue;
      spec.noise_vars[{i, j}] = random_spd();
      if (i != spec.pivot.view && j != spec.pivot.frame) spec.rest_coeffs[{i, j}] = random_coeff();
    }
  }
  if (violate_assumption) {
    // Wire every row entry into every column entry with coefficients bounded
    // away from zero, so the violation is never accidentally negligible.
    for (int i = 0; i < v; ++i) {
      if (i == spec.pivot.view) continue;
      for (int j = 0; j < f; ++j) {
        if (j == spec.pivot.frame) continue;
        Eigen::MatrixXd m(d, d);
        for (int a = 0; a < d; ++a) {
          for (int b = 0; b < d; ++b) {
            const double mag = uniform(0.3, 0.9) / (d * std::max(1, f - 1));
            m(a, b) = (rng.next_u64() & 1u) ? mag : -mag;
          }
        }
        spec.cross_coeffs[{i, j}] = m;
      }
    }
  }
  return spec;
}

}  // namespace scorefuse
