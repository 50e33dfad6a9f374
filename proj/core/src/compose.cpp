#include "scorefuse/compose.hpp"

#include <numeric>
#include <stdexcept>

#include "scorefuse/schedule.hpp"

namespace scorefuse {

Eigen::VectorXd LatentMatrix::frame_column(int j) const {
  Eigen::VectorXd col(static_cast<Eigen::Index>(v_) * d_);
  for (int i = 0; i < v_; ++i) col.segment(static_cast<Eigen::Index>(i) * d_, d_) = entry(i, j);
  return col;
}

void LatentMatrix::set_frame_column(int j, const Eigen::VectorXd& col) {
  for (int i = 0; i < v_; ++i) entry(i, j) = col.segment(static_cast<Eigen::Index>(i) * d_, d_);
}

double scale_schedule_default(int step) {
  if (step < 0) throw std::invalid_argument("scale_schedule_default: negative step");
  return 0.5;
}

Eigen::VectorXd compose_scores_exact(const Eigen::VectorXd& row_score,
                                     const Eigen::VectorXd& col_score,
                                     const Eigen::VectorXd& pivot_score) {
  if (row_score.size() != col_score.size() || row_score.size() != pivot_score.size()) {
    throw std::invalid_argument("compose_scores_exact: dimension mismatch");
  }
  return row_score + col_score - pivot_score;
}

Eigen::VectorXd compose_scores_convex(const Eigen::VectorXd& row_score,
                                      const Eigen::VectorXd& col_score, double s) {
  if (row_score.size() != col_score.size()) {
    throw std::invalid_argument("compose_scores_convex: dimension mismatch");
  }
  if (!(s >= 0.0 && s <= 1.0)) {
    throw std::invalid_argument("compose_scores_convex: s must lie in [0, 1]");
  }
  return s * row_score + (1.0 - s) * col_score;
}

LatentMatrix matrix_direction(const LatentMatrix& state, const Denoiser& video_denoiser,
                              const Denoiser& multiview_denoiser, double sigma, double s,
                              bool swap_orientation, const DirectionOrder* order) {
  const int v = state.views(), f = state.frames(), d = state.entry_dim();
  if (video_denoiser.dim() != static_cast<Eigen::Index>(f) * d) {
    throw std::invalid_argument("matrix_direction: video denoiser dimension != F*d");
  }
  if (multiview_denoiser.dim() != static_cast<Eigen::Index>(v) * d) {
    throw std::invalid_argument("matrix_direction: multi-view denoiser dimension != V*d");
  }
  if (!(s >= 0.0 && s <= 1.0)) {
    throw std::invalid_argument("matrix_direction: s must lie in [0, 1]");
  }

  std::vector<int> row_order(v), col_order(f);
  std::iota(row_order.begin(), row_order.end(), 0);
  std::iota(col_order.begin(), col_order.end(), 0);
  if (order) {
    if (!order->rows.empty()) row_order = order->rows;
    if (!order->cols.empty()) col_order = order->cols;
  }

  // Evaluations land in per-slot buffers, so the combine below is
  // deterministic regardless of evaluation order.
  std::vector<Eigen::VectorXd> row_dir(v), col_dir(f);
  for (int i : row_order) {
    row_dir[i] = ode_direction(video_denoiser, state.view_row(i), sigma);
  }
  for (int j : col_order) {
    col_dir[j] = ode_direction(multiview_denoiser, state.frame_column(j), sigma);
  }

  const double w_video = swap_orientation ? s : 1.0 - s;
  const double w_multiview = swap_orientation ? 1.0 - s : s;
  LatentMatrix dir(v, f, d);
  for (int i = 0; i < v; ++i) {
    for (int j = 0; j < f; ++j) {
      dir.entry(i, j) = w_video * row_dir[i].segment(static_cast<Eigen::Index>(j) * d, d) +
                        w_multiview * col_dir[j].segment(static_cast<Eigen::Index>(i) * d, d);
    }
  }
  return dir;
}

LatentMatrix matrix_direction_exact(const LatentMatrix& state, const Denoiser& video_denoiser,
                                    const Denoiser& multiview_denoiser,
                                    const Denoiser& entry_denoiser, double sigma) {
  const int v = state.views(), f = state.frames(), d = state.entry_dim();
  if (entry_denoiser.dim() != d) {
    throw std::invalid_argument("matrix_direction_exact: entry denoiser dimension != d");
  }
  // Row + column passes with full weight on each.
  LatentMatrix dir = matrix_direction(state, video_denoiser, multiview_denoiser, sigma, 0.5);
  for (int i = 0; i < v; ++i) {
    for (int j = 0; j < f; ++j) {
      Eigen::VectorXd x = state.entry(i, j);
      dir.entry(i, j) = 2.0 * dir.entry(i, j).eval() - ode_direction(entry_denoiser, x, sigma);
    }
  }
  return dir;
}

LatentMatrix apply_conditions(const LatentMatrix& state, const ConditionSet& conditions,
                              double sigma, const RngRoot& root, std::uint64_t ctx_a,
                              std::uint64_t ctx_b) {
  LatentMatrix out = state;
  for (const auto& [key, clean] : conditions.entries) {
    const auto [i, j] = key;
    if (i < 0 || i >= state.views() || j < 0 || j >= state.frames()) {
      throw std::out_of_range("apply_conditions: condition index out of range");
    }
    if (clean.size() != state.entry_dim()) {
      throw std::invalid_argument("apply_conditions: condition dimension mismatch");
    }
    Stream s = root.stream(StreamTag::kCondition, ctx_a, ctx_b, static_cast<std::uint64_t>(i),
                           static_cast<std::uint64_t>(j));
    out.entry(i, j) = perturb(clean, sigma, 1.0, s);
  }
  return out;
}

}  // namespace scorefuse
