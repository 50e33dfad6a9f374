#ifndef SCOREFUSE_SCHEDULE_HPP
#define SCOREFUSE_SCHEDULE_HPP

#include <vector>

#include <Eigen/Dense>

#include "scorefuse/rng.hpp"

namespace scorefuse {

// Discrete noise schedule sigma_0 > sigma_1 > ... > sigma_N = 0.
struct SigmaSchedule {
  std::vector<double> levels;  // size n_steps() + 1, last entry exactly 0

  int n_steps() const { return static_cast<int>(levels.size()) - 1; }
  double sigma_max() const { return levels.front(); }

  bool valid() const;
};

// Default schedule parameters (EDM convention).
inline constexpr double kDefaultSigmaMin = 0.002;
inline constexpr double kDefaultSigmaMax = 80.0;
inline constexpr double kDefaultRho = 7.0;
inline constexpr int kDefaultSteps = 50;

// sigma_i = (smax^{1/rho} + i/(N-1) * (smin^{1/rho} - smax^{1/rho}))^rho for
// i < N, followed by a terminal 0. For N = 1 the schedule is [smax, 0].
SigmaSchedule karras_sigmas(int n_steps, double sigma_min, double sigma_max, double rho);

inline SigmaSchedule karras_sigmas(int n_steps) {
  return karras_sigmas(n_steps, kDefaultSigmaMin, kDefaultSigmaMax, kDefaultRho);
}

// alpha * x + sigma * eps with eps ~ N(0, I) drawn from the given stream.
// sigma = 0 is deterministic and consumes no randomness.
Eigen::VectorXd perturb(const Eigen::VectorXd& x, double sigma, double alpha, Stream& rng);

inline Eigen::VectorXd perturb(const Eigen::VectorXd& x, double sigma, Stream& rng) {
  return perturb(x, sigma, 1.0, rng);
}

}  // namespace scorefuse

#endif  // SCOREFUSE_SCHEDULE_HPP
