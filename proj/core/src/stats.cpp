#include "scorefuse/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace scorefuse {

namespace {
// Pairwise distances of the pooled sample; used by the permutation test.
Eigen::MatrixXd pooled_distances(std::span<const Eigen::VectorXd> a,
                                 std::span<const Eigen::VectorXd> b) {
  const Eigen::Index n = static_cast<Eigen::Index>(a.size() + b.size());
  const auto at = [&](Eigen::Index i) -> const Eigen::VectorXd& {
    return i < static_cast<Eigen::Index>(a.size()) ? a[i] : b[i - a.size()];
  };
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dist(i, j) = dist(j, i) = (at(i) - at(j)).norm();
    }
  }
  return dist;
}

double energy_from_labels(const Eigen::MatrixXd& dist, const std::vector<int>& labels,
                          Eigen::Index na, Eigen::Index nb) {
  double within_a = 0.0, within_b = 0.0, between = 0.0;
  const Eigen::Index n = dist.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = dist(i, j);
      if (labels[i] == 0 && labels[j] == 0) within_a += d;
      else if (labels[i] == 1 && labels[j] == 1) within_b += d;
      else if (labels[i] == 0) between += d;
    }
  }
  return 2.0 * between / (static_cast<double>(na) * nb) -
         within_a / (static_cast<double>(na) * na) - within_b / (static_cast<double>(nb) * nb);
}
}  // namespace

double energy_distance(std::span<const Eigen::VectorXd> a, std::span<const Eigen::VectorXd> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("energy_distance: empty sample set");
  if (a.front().size() != b.front().size()) {
    throw std::invalid_argument("energy_distance: dimension mismatch");
  }
  const Eigen::MatrixXd dist = pooled_distances(a, b);
  std::vector<int> labels(a.size() + b.size(), 0);
  std::fill(labels.begin() + static_cast<std::ptrdiff_t>(a.size()), labels.end(), 1);
  return energy_from_labels(dist, labels, static_cast<Eigen::Index>(a.size()),
                            static_cast<Eigen::Index>(b.size()));
}

double energy_permutation_pvalue(std::span<const Eigen::VectorXd> a,
                                 std::span<const Eigen::VectorXd> b, int n_permutations,
                                 Stream& rng) {
  if (a.empty() || b.empty()) throw std::invalid_argument("energy_permutation_pvalue: empty set");
  const Eigen::MatrixXd dist = pooled_distances(a, b);
  const Eigen::Index na = static_cast<Eigen::Index>(a.size());
  const Eigen::Index nb = static_cast<Eigen::Index>(b.size());
  std::vector<int> labels(a.size() + b.size(), 0);
  std::fill(labels.begin() + static_cast<std::ptrdiff_t>(a.size()), labels.end(), 1);
  const double observed = energy_from_labels(dist, labels, na, nb);

  int at_least = 0;
  for (int p = 0; p < n_permutations; ++p) {
    // Fisher-Yates on the label vector.
    for (std::size_t i = labels.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.next_u64() % (i + 1));
      std::swap(labels[i], labels[j]);
    }
    if (energy_from_labels(dist, labels, na, nb) >= observed) ++at_least;
  }
  return (1.0 + at_least) / (1.0 + n_permutations);
}

double bimodality_coefficient(std::span<const double> values) {
  if (values.size() < 4) throw std::invalid_argument("bimodality_coefficient: need >= 4 values");
  const double n = static_cast<double>(values.size());
  const double mean = sample_mean(values);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : values) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 <= 0.0) return 0.0;
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2);
  return (skew * skew + 1.0) / kurt;
}

BootstrapInterval bootstrap_mean_ci(std::span<const double> values, int n_resamples, double alpha,
                                    Stream& rng) {
  if (values.empty()) throw std::invalid_argument("bootstrap_mean_ci: empty sample");
  std::vector<double> means(n_resamples);
  const std::size_t n = values.size();
  for (int r = 0; r < n_resamples; ++r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += values[rng.next_u64() % n];
    means[r] = acc / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const auto quantile = [&](double q) {
    const double pos = q * (means.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, means.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return (1.0 - w) * means[lo] + w * means[hi];
  };
  return {quantile(alpha / 2.0), quantile(1.0 - alpha / 2.0), sample_mean(values)};
}

double sample_mean(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

Eigen::VectorXd sample_mean(std::span<const Eigen::VectorXd> samples) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(samples.front().size());
  for (const auto& s : samples) mean += s;
  return mean / static_cast<double>(samples.size());
}

Eigen::MatrixXd sample_covariance(std::span<const Eigen::VectorXd> samples) {
  const Eigen::VectorXd mean = sample_mean(samples);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(mean.size(), mean.size());
  for (const auto& s : samples) {
    const Eigen::VectorXd d = s - mean;
    cov += d * d.transpose();
  }
  return cov / static_cast<double>(samples.size() - 1);
}

}  // namespace scorefuse
