#ifndef SCOREFUSE_SAMPLER_HPP
#define SCOREFUSE_SAMPLER_HPP

#include <cstdint>
#include <vector>

#include "scorefuse/compose.hpp"
#include "scorefuse/schedule.hpp"

namespace scorefuse {

struct StepRecord {
  int step = 0;
  int repeat = 0;
  double sigma = 0.0;
  long long denoiser_calls = 0;
};

struct StateSnapshot {
  int step = 0;
  int repeat = 0;
  double sigma = 0.0;
  Eigen::VectorXd state;  // raw composed trajectory, before condition injection
};

struct SamplerRun {
  std::vector<StepRecord> steps;
  std::vector<StateSnapshot> snapshots;
  long long total_denoiser_calls = 0;

  int composed_steps() const { return static_cast<int>(steps.size()); }
};

struct MatrixShape {
  int views = 1;
  int frames = 1;
  int entry_dim = 1;
};

struct SampleOptions {
  bool record_snapshots = false;
};

struct SampleResult {
  LatentMatrix matrix;
  SamplerRun run;
};

// Deterministic Euler integration of the probability-flow ODE for a single
// vector: x starts as sigma_0 * eps and follows
// x <- x + (sigma_{i+1} - sigma_i) * ode_direction(x, sigma_i) down to 0.
Eigen::VectorXd pf_ode_sample(const Denoiser& denoiser, const SigmaSchedule& schedule, Stream& rng);

// Re-noise toward a higher level: x + (sigma_hi - sigma_lo) * eps per entry
// (or sqrt(sigma_hi^2 - sigma_lo^2) in variance-matched mode), streams keyed
// by (step, repeat, entry).
LatentMatrix vrs_renoise(const LatentMatrix& x_next, double sigma_hi, double sigma_lo,
                         const RngRoot& root, std::uint64_t step, std::uint64_t repeat,
                         bool variance_matched = false);

// Full joint sampler over the latent matrix: per step, the convex-composed
// direction with V + F denoiser calls, Euler update, and for the first
// n_rollback steps rollback_repeats passes with re-noising in between.
// Conditions are re-injected before every direction evaluation and once more
// at sigma = 0. The exact composition mode additionally requires
// entry_denoiser for the per-entry term.
SampleResult sample_matrix(const Denoiser& video_denoiser, const Denoiser& multiview_denoiser,
                           const SigmaSchedule& schedule, const CompositionConfig& config,
                           const ConditionSet& conditions, MatrixShape shape, std::uint64_t seed,
                           SampleOptions options = {}, const Denoiser* entry_denoiser = nullptr);

}  // namespace scorefuse

#endif  // SCOREFUSE_SAMPLER_HPP
