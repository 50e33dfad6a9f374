#ifndef SCOREFUSE_COMPOSE_HPP
#define SCOREFUSE_COMPOSE_HPP

#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "scorefuse/denoise.hpp"
#include "scorefuse/rng.hpp"

namespace scorefuse {

// V x F grid of d-dimensional latent vectors, stored flat in row-major order:
// entry (i, j) occupies coordinates [(i*F + j)*d, (i*F + j + 1)*d).
class LatentMatrix {
 public:
  LatentMatrix(int v, int f, int entry_dim)
      : v_(v), f_(f), d_(entry_dim),
        data_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(v) * f * entry_dim)) {}

  int views() const { return v_; }
  int frames() const { return f_; }
  int entry_dim() const { return d_; }
  Eigen::Index size() const { return data_.size(); }

  Eigen::VectorBlock<Eigen::VectorXd> entry(int i, int j) {
    return data_.segment(offset(i, j), d_);
  }
  Eigen::VectorBlock<const Eigen::VectorXd> entry(int i, int j) const {
    return data_.segment(offset(i, j), d_);
  }

  // One view's frame sequence (contiguous, length F*d).
  Eigen::VectorBlock<Eigen::VectorXd> view_row(int i) {
    return data_.segment(offset(i, 0), static_cast<Eigen::Index>(f_) * d_);
  }
  Eigen::VectorBlock<const Eigen::VectorXd> view_row(int i) const {
    return data_.segment(offset(i, 0), static_cast<Eigen::Index>(f_) * d_);
  }

  // One frame's view sweep (gathered, length V*d).
  Eigen::VectorXd frame_column(int j) const;
  void set_frame_column(int j, const Eigen::VectorXd& col);

  Eigen::VectorXd& data() { return data_; }
  const Eigen::VectorXd& data() const { return data_; }

  bool all_finite() const { return data_.allFinite(); }

 private:
  Eigen::Index offset(int i, int j) const {
    return (static_cast<Eigen::Index>(i) * f_ + j) * d_;
  }

  int v_, f_, d_;
  Eigen::VectorXd data_;
};

// Known entries held fixed during sampling (replacement-method inpainting).
struct ConditionSet {
  std::map<std::pair<int, int>, Eigen::VectorXd> entries;

  bool empty() const { return entries.empty(); }
};

enum class CompositionMode { kExact, kConvex };

struct CompositionConfig {
  CompositionMode mode = CompositionMode::kConvex;
  std::function<double(int)> s_schedule;  // defaults to the constant 0.5
  int n_rollback = 0;                     // N_r: steps that run extra repeats
  int rollback_repeats = 1;               // R
  // Default orientation weights the frame-sequence (video) direction with
  // (1 - s) and the view-sweep direction with s; the flag swaps the pair.
  bool swap_orientation = false;
  // Rollback noise: as written, (sigma_hi - sigma_lo) * eps; the
  // variance-matched variant uses sqrt(sigma_hi^2 - sigma_lo^2).
  bool variance_matched_renoise = false;
  // Re-entry level for repeats as a fraction between sigma_{i+1} (0) and
  // sigma_i (1).
  double rollback_interp = 1.0;

  double s_at(int step) const { return s_schedule ? s_schedule(step) : 0.5; }
};

// Constant scale schedule: 0.5 at every step.
double scale_schedule_default(int step);

// row + col - pivot (exact decomposition of the joint score).
Eigen::VectorXd compose_scores_exact(const Eigen::VectorXd& row_score,
                                     const Eigen::VectorXd& col_score,
                                     const Eigen::VectorXd& pivot_score);

// s * row + (1 - s) * col, s in [0, 1].
Eigen::VectorXd compose_scores_convex(const Eigen::VectorXd& row_score,
                                      const Eigen::VectorXd& col_score, double s);

// Optional explicit evaluation order for the row/column denoiser passes;
// the result must be independent of it (bit-exact).
struct DirectionOrder {
  std::vector<int> rows;
  std::vector<int> cols;
};

// Convex-composed ODE direction field over the matrix: exactly V evaluations
// of video_denoiser (one per view's frame sequence, weight 1-s) and F
// evaluations of multiview_denoiser (one per frame's view sweep, weight s).
LatentMatrix matrix_direction(const LatentMatrix& state, const Denoiser& video_denoiser,
                              const Denoiser& multiview_denoiser, double sigma, double s,
                              bool swap_orientation = false,
                              const DirectionOrder* order = nullptr);

// Exact-composed direction field: per entry, row direction + column direction
// - entry direction, with the per-entry term supplied by entry_denoiser
// (V + F + V*F evaluations).
LatentMatrix matrix_direction_exact(const LatentMatrix& state, const Denoiser& video_denoiser,
                                    const Denoiser& multiview_denoiser,
                                    const Denoiser& entry_denoiser, double sigma);

// Overwrites each conditioned entry with perturb(clean, sigma) from a stream
// keyed by (ctx_a, ctx_b, view, frame); sigma = 0 writes the clean values
// bit-exact.
LatentMatrix apply_conditions(const LatentMatrix& state, const ConditionSet& conditions,
                              double sigma, const RngRoot& root, std::uint64_t ctx_a = 0,
                              std::uint64_t ctx_b = 0);

}  // namespace scorefuse

#endif  // SCOREFUSE_COMPOSE_HPP
