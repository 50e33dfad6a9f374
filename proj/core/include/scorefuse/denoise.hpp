#ifndef SCOREFUSE_DENOISE_HPP
#define SCOREFUSE_DENOISE_HPP

#include <atomic>
#include <memory>
#include <span>

#include <Eigen/Dense>

#include "scorefuse/models.hpp"

namespace scorefuse {

// Posterior-mean estimator D(x; sigma) ~ E[x0 | x, sigma]. Implementations
// are immutable after construction; evaluate is re-entrant.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Eigen::Index dim() const = 0;
  virtual Eigen::VectorXd evaluate(const Eigen::VectorXd& x, double sigma) const = 0;

  // Batched evaluation at a shared sigma; the default loops.
  virtual void evaluate_batch(std::span<const Eigen::VectorXd> xs, double sigma,
                              std::span<Eigen::VectorXd> out) const {
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = evaluate(xs[i], sigma);
  }
};

// Exact denoiser of a Gaussian prior:
//   D(x; sigma) = mu + Sigma (Sigma + sigma^2 I)^{-1} (x - mu).
// Solves with an unpivoted Cholesky factorization, so evaluating a
// block-diagonal model is bit-identical to evaluating its blocks separately.
class GaussianDenoiser final : public Denoiser {
 public:
  explicit GaussianDenoiser(GaussianModel model) : model_(std::move(model)) {}

  Eigen::Index dim() const override { return model_.dim(); }
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x, double sigma) const override;

  const GaussianModel& model() const { return model_; }

 private:
  GaussianModel model_;
};

// Exact denoiser of a Gaussian-mixture prior (responsibility-weighted
// per-component posterior means, log-sum-exp stabilized).
class GmmDenoiser final : public Denoiser {
 public:
  explicit GmmDenoiser(GmmModel model) : model_(std::move(model)) {}

  Eigen::Index dim() const override { return model_.dim(); }
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x, double sigma) const override {
    return model_.posterior_mean(x, sigma);
  }

  const GmmModel& model() const { return model_; }

 private:
  GmmModel model_;
};

// Applies a base denoiser independently to consecutive segments.
class EntrywiseDenoiser final : public Denoiser {
 public:
  EntrywiseDenoiser(std::shared_ptr<const Denoiser> base, int copies)
      : base_(std::move(base)), copies_(copies) {}

  Eigen::Index dim() const override { return base_->dim() * copies_; }
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x, double sigma) const override;

 private:
  std::shared_ptr<const Denoiser> base_;
  int copies_;
};

// Decorator counting evaluate calls (batch entries count individually).
class CountingDenoiser final : public Denoiser {
 public:
  explicit CountingDenoiser(const Denoiser& base) : base_(&base) {}

  Eigen::Index dim() const override { return base_->dim(); }
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x, double sigma) const override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return base_->evaluate(x, sigma);
  }

  long long calls() const { return calls_.load(std::memory_order_relaxed); }

 private:
  const Denoiser* base_;
  mutable std::atomic<long long> calls_{0};
};

inline std::unique_ptr<Denoiser> denoiser_from_gaussian(GaussianModel model) {
  return std::make_unique<GaussianDenoiser>(std::move(model));
}

inline std::unique_ptr<Denoiser> denoiser_from_gmm(GmmModel model) {
  return std::make_unique<GmmDenoiser>(std::move(model));
}

// (D(x; sigma) - x) / sigma^2. Throws for sigma <= 0.
Eigen::VectorXd score_of(const Denoiser& denoiser, const Eigen::VectorXd& x, double sigma);

// (x - D(x; sigma)) / sigma = -sigma * score_of(x, sigma).
Eigen::VectorXd ode_direction(const Denoiser& denoiser, const Eigen::VectorXd& x, double sigma);

}  // namespace scorefuse

#endif  // SCOREFUSE_DENOISE_HPP
