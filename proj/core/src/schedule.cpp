#include "scorefuse/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace scorefuse {

bool SigmaSchedule::valid() const {
  if (levels.size() < 2) return false;
  if (levels.back() != 0.0) return false;
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
    if (!(levels[i] > levels[i + 1])) return false;
  }
  return true;
}

SigmaSchedule karras_sigmas(int n_steps, double sigma_min, double sigma_max, double rho) {
  if (!(sigma_min > 0.0) || !(sigma_max > sigma_min)) {
    throw std::invalid_argument("karras_sigmas: require sigma_max > sigma_min > 0");
  }
  if (n_steps < 1) throw std::invalid_argument("karras_sigmas: n_steps must be >= 1");
  if (!(rho > 0.0)) throw std::invalid_argument("karras_sigmas: rho must be positive");

  SigmaSchedule sched;
  sched.levels.reserve(static_cast<std::size_t>(n_steps) + 1);
  if (n_steps == 1) {
    sched.levels.push_back(sigma_max);
  } else {
    const double lo = std::pow(sigma_min, 1.0 / rho);
    const double hi = std::pow(sigma_max, 1.0 / rho);
    for (int i = 0; i < n_steps; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(n_steps - 1);
      sched.levels.push_back(std::pow(hi + t * (lo - hi), rho));
    }
    // Endpoints come out of the formula up to roundoff; force them exact.
    sched.levels.front() = sigma_max;
    sched.levels.back() = sigma_min;
  }
  sched.levels.push_back(0.0);
  return sched;
}

Eigen::VectorXd perturb(const Eigen::VectorXd& x, double sigma, double alpha, Stream& rng) {
  if (sigma < 0.0) throw std::invalid_argument("perturb: sigma must be non-negative");
  Eigen::VectorXd out = alpha * x;
  if (sigma > 0.0) out += sigma * rng.normal_vector(x.size());
  return out;
}

}  // namespace scorefuse
