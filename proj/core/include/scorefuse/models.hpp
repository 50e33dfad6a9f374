#ifndef SCOREFUSE_MODELS_HPP
#define SCOREFUSE_MODELS_HPP

#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "scorefuse/rng.hpp"

namespace scorefuse {

struct DegenerateModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Multivariate Gaussian with a cached Cholesky factor. Construction rejects
// asymmetric or near-singular covariances (factor diagonal < 1e-10).
class GaussianModel {
 public:
  GaussianModel(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

  Eigen::Index dim() const { return mean_.size(); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }
  const Eigen::LLT<Eigen::MatrixXd>& factorization() const { return llt_; }

  // -Sigma^{-1} (x - mu), via the cached factor.
  Eigen::VectorXd score(const Eigen::VectorXd& x) const;

  double log_density(const Eigen::VectorXd& x) const;

  Eigen::VectorXd draw(Stream& rng) const;

  // Same mean, covariance Sigma + sigma^2 I.
  GaussianModel noised(double sigma) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double log_norm_;  // -(d/2) log(2 pi) - (1/2) log det Sigma
};

// Finite Gaussian mixture over a shared dimension.
class GmmModel {
 public:
  GmmModel(std::vector<double> weights, std::vector<GaussianModel> components);

  Eigen::Index dim() const { return components_.front().dim(); }
  std::size_t n_components() const { return components_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<GaussianModel>& components() const { return components_; }

  // Exact gradient of log sum_k w_k N(x; mu_k, Sigma_k + sigma^2 I),
  // responsibilities stabilized with log-sum-exp.
  Eigen::VectorXd score(const Eigen::VectorXd& x, double sigma) const;

  // log density of the sigma-noised mixture.
  double log_density(const Eigen::VectorXd& x, double sigma) const;

  // Posterior mean E[x0 | x, sigma] of the noised mixture.
  Eigen::VectorXd posterior_mean(const Eigen::VectorXd& x, double sigma) const;

  Eigen::VectorXd draw(Stream& rng) const;

 private:
  std::vector<double> weights_;
  std::vector<GaussianModel> components_;
};

struct EntryIndex {
  int view = 0;
  int frame = 0;
  friend auto operator<=>(const EntryIndex&, const EntryIndex&) = default;
};

// Exact joint Gaussian over all V*F*d coordinates of a latent matrix, with
// the (view, frame, coordinate) <-> flat index bijection.
class MatrixGaussianModel {
 public:
  MatrixGaussianModel(int v, int f, int entry_dim, GaussianModel joint);

  int views() const { return v_; }
  int frames() const { return f_; }
  int entry_dim() const { return d_; }
  const GaussianModel& joint() const { return joint_; }

  Eigen::Index flat(int view, int frame, int coord) const {
    check_entry({view, frame});
    return (static_cast<Eigen::Index>(view) * f_ + frame) * d_ + coord;
  }
  Eigen::Index entry_offset(EntryIndex e) const { return flat(e.view, e.frame, 0); }
  EntryIndex entry_of(Eigen::Index flat_index) const;

  // Gaussian marginal over the listed entries (selection of mean/covariance
  // blocks, in the order given).
  GaussianModel marginal(std::span<const EntryIndex> entries) const;

  // Conditional covariance block Cov(a, b | given) via the Schur complement;
  // the zero matrix certifies conditional independence in the Gaussian case.
  Eigen::MatrixXd partial_covariance(EntryIndex a, EntryIndex b, EntryIndex given) const;

 private:
  void check_entry(EntryIndex e) const;

  int v_, f_, d_;
  GaussianModel joint_;
};

// Linear structural model rooted at a pivot entry:
//   pivot                X           ~ pivot prior
//   row entry (i0, j)    = row_coeffs[j] * X + eps
//   column entry (i, j0) = col_coeffs[i] * X + eps
//   interior (i, j)      = rest_coeffs[{i,j}] * I_{i,j0} + eps
// The induced joint satisfies, exactly: row and column entries are
// conditionally independent given the pivot, and every interior entry is
// independent of the pivot given its column anchor.
//
// cross_coeffs optionally adds edges from row entries into column entries
// (column entry gains + cross_coeffs[{i,j}] * I_{i0,j}), which destroys the
// conditional independence at the pivot; used as a negative control.
struct PivotTreeSpec {
  int v = 1;
  int f = 1;
  int d = 1;
  EntryIndex pivot{0, 0};
  Eigen::VectorXd pivot_mean;   // length d
  Eigen::MatrixXd pivot_cov;    // d x d SPD
  std::map<int, Eigen::MatrixXd> row_coeffs;                    // frame j != pivot.frame
  std::map<int, Eigen::MatrixXd> col_coeffs;                    // view i != pivot.view
  std::map<std::pair<int, int>, Eigen::MatrixXd> rest_coeffs;   // interior (i, j)
  std::map<std::pair<int, int>, Eigen::MatrixXd> noise_vars;    // every non-pivot (i, j)
  std::map<std::pair<int, int>, Eigen::MatrixXd> cross_coeffs;  // column entry (i, j0) keyed by (i, row frame j)
};

MatrixGaussianModel build_pivot_tree(const PivotTreeSpec& spec);

// Randomized spec for validation sweeps. noise_inflation adds
// noise_inflation^2 * I to the pivot prior and every innovation covariance,
// i.e. the tree is constructed directly over variables at that noise level.
// violate_assumption wires cross edges so the conditional independence at the
// pivot genuinely fails.
PivotTreeSpec random_pivot_tree_spec(Stream& rng, int v, int f, int d,
                                     double noise_inflation = 0.0,
                                     bool violate_assumption = false);

}  // namespace scorefuse

#endif  // SCOREFUSE_MODELS_HPP
