#ifndef SCOREFUSE_STATS_HPP
#define SCOREFUSE_STATS_HPP

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "scorefuse/rng.hpp"

namespace scorefuse {

// Energy-distance V-statistic:
//   2 E||a - b|| - E||a - a'|| - E||b - b'||
// with expectations over all pairs (diagonal included in the within terms).
double energy_distance(std::span<const Eigen::VectorXd> a, std::span<const Eigen::VectorXd> b);

// Permutation p-value for the two-sample energy distance (label shuffles over
// the pooled sample; pairwise distances computed once). Returns the fraction
// of permuted statistics >= the observed one.
double energy_permutation_pvalue(std::span<const Eigen::VectorXd> a,
                                 std::span<const Eigen::VectorXd> b, int n_permutations,
                                 Stream& rng);

// (skewness^2 + 1) / kurtosis with the full (non-excess) kurtosis; 5/9 for
// the uniform distribution, 1/3 for a Gaussian, -> 1 for two point masses.
double bimodality_coefficient(std::span<const double> values);

struct BootstrapInterval {
  double lo = 0.0;
  double hi = 0.0;
  double mean = 0.0;
};

// Percentile bootstrap interval for the mean at confidence 1 - alpha.
BootstrapInterval bootstrap_mean_ci(std::span<const double> values, int n_resamples, double alpha,
                                    Stream& rng);

double sample_mean(std::span<const double> values);

Eigen::VectorXd sample_mean(std::span<const Eigen::VectorXd> samples);
Eigen::MatrixXd sample_covariance(std::span<const Eigen::VectorXd> samples);

}  // namespace scorefuse

#endif  // SCOREFUSE_STATS_HPP
