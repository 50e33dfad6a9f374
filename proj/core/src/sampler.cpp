#include "scorefuse/sampler.hpp"

#include <stdexcept>

namespace scorefuse {

Eigen::VectorXd pf_ode_sample(const Denoiser& denoiser, const SigmaSchedule& schedule,
                              Stream& rng) {
  if (!schedule.valid()) throw std::invalid_argument("pf_ode_sample: invalid schedule");
  Eigen::VectorXd x = schedule.levels.front() * rng.normal_vector(denoiser.dim());
  for (int i = 0; i < schedule.n_steps(); ++i) {
    const double sigma = schedule.levels[i];
    const double sigma_next = schedule.levels[i + 1];
    x = x + (sigma_next - sigma) * ode_direction(denoiser, x, sigma);
  }
  return x;
}

LatentMatrix vrs_renoise(const LatentMatrix& x_next, double sigma_hi, double sigma_lo,
                         const RngRoot& root, std::uint64_t step, std::uint64_t repeat,
                         bool variance_matched) {
  if (!(sigma_hi >= sigma_lo) || sigma_lo < 0.0) {
    throw std::invalid_argument("vrs_renoise: require sigma_hi >= sigma_lo >= 0");
  }
  const double scale = variance_matched ? std::sqrt(sigma_hi * sigma_hi - sigma_lo * sigma_lo)
                                        : sigma_hi - sigma_lo;
  LatentMatrix out = x_next;
  if (scale == 0.0) return out;
  for (int i = 0; i < out.views(); ++i) {
    for (int j = 0; j < out.frames(); ++j) {
      Stream s = root.stream(StreamTag::kRollback, step, repeat, static_cast<std::uint64_t>(i),
                             static_cast<std::uint64_t>(j));
      out.entry(i, j) += scale * s.normal_vector(out.entry_dim());
    }
  }
  return out;
}

SampleResult sample_matrix(const Denoiser& video_denoiser, const Denoiser& multiview_denoiser,
                           const SigmaSchedule& schedule, const CompositionConfig& config,
                           const ConditionSet& conditions, MatrixShape shape, std::uint64_t seed,
                           SampleOptions options, const Denoiser* entry_denoiser) {
  const int v = shape.views, f = shape.frames, d = shape.entry_dim;
  if (!schedule.valid()) throw std::invalid_argument("sample_matrix: invalid schedule");
  if (config.n_rollback > schedule.n_steps()) {
    throw std::invalid_argument("sample_matrix: n_rollback exceeds step count");
  }
  if (config.rollback_repeats < 1) {
    throw std::invalid_argument("sample_matrix: rollback_repeats must be >= 1");
  }
  if (config.mode == CompositionMode::kExact && entry_denoiser == nullptr) {
    throw std::invalid_argument("sample_matrix: exact mode requires an entry denoiser");
  }
  if (video_denoiser.dim() != static_cast<Eigen::Index>(f) * d ||
      multiview_denoiser.dim() != static_cast<Eigen::Index>(v) * d) {
    throw std::invalid_argument("sample_matrix: denoiser dimensions do not match shape");
  }

  const RngRoot root(seed);
  const CountingDenoiser video(video_denoiser);
  const CountingDenoiser multiview(multiview_denoiser);

  SampleResult result{LatentMatrix(v, f, d), SamplerRun{}};
  LatentMatrix& state = result.matrix;
  for (int i = 0; i < v; ++i) {
    for (int j = 0; j < f; ++j) {
      Stream s = root.stream(StreamTag::kInitNoise, static_cast<std::uint64_t>(i),
                             static_cast<std::uint64_t>(j));
      state.entry(i, j) = schedule.levels.front() * s.normal_vector(d);
    }
  }

  const int n = schedule.n_steps();
  for (int step = 0; step < n; ++step) {
    const int repeats = step < config.n_rollback ? config.rollback_repeats : 1;
    const double sigma = schedule.levels[step];
    const double sigma_next = schedule.levels[step + 1];
    const double sigma_reentry = sigma_next + config.rollback_interp * (sigma - sigma_next);
    for (int rep = 0; rep < repeats; ++rep) {
      const double sigma_eval = rep == 0 ? sigma : sigma_reentry;
      if (options.record_snapshots) {
        result.run.snapshots.push_back({step, rep, sigma_eval, state.data()});
      }
      state = apply_conditions(state, conditions, sigma_eval, root,
                               static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(rep));
      const long long before = video.calls() + multiview.calls();
      LatentMatrix dir =
          config.mode == CompositionMode::kExact
              ? matrix_direction_exact(state, video, multiview, *entry_denoiser, sigma_eval)
              : matrix_direction(state, video, multiview, sigma_eval, config.s_at(step),
                                 config.swap_orientation);
      LatentMatrix next = state;
      next.data() = state.data() + (sigma_next - sigma_eval) * dir.data();
      result.run.steps.push_back(
          {step, rep, sigma_eval, video.calls() + multiview.calls() - before});
      if (rep < repeats - 1) {
        state = vrs_renoise(next, sigma_reentry, sigma_next, root,
                            static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(rep),
                            config.variance_matched_renoise);
      } else {
        state = next;
      }
    }
  }
  state = apply_conditions(state, conditions, 0.0, root, static_cast<std::uint64_t>(n), 0);
  result.run.total_denoiser_calls = video.calls() + multiview.calls();
  return result;
}

}  // namespace scorefuse
