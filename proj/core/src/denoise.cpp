#include "scorefuse/denoise.hpp"

#include <stdexcept>

namespace scorefuse {

Eigen::VectorXd GaussianDenoiser::evaluate(const Eigen::VectorXd& x, double sigma) const {
  if (x.size() != dim()) throw std::invalid_argument("GaussianDenoiser: dimension mismatch");
  Eigen::MatrixXd noised = model_.covariance();
  noised.diagonal().array() += sigma * sigma;
  Eigen::LLT<Eigen::MatrixXd> llt(noised);
  if (llt.info() != Eigen::Success) {
    throw DegenerateModelError("GaussianDenoiser: noised covariance not positive definite");
  }
  return model_.mean() + model_.covariance() * llt.solve(x - model_.mean());
}

Eigen::VectorXd EntrywiseDenoiser::evaluate(const Eigen::VectorXd& x, double sigma) const {
  if (x.size() != dim()) throw std::invalid_argument("EntrywiseDenoiser: dimension mismatch");
  const Eigen::Index block = base_->dim();
  Eigen::VectorXd out(dim());
  for (int c = 0; c < copies_; ++c) {
    out.segment(c * block, block) = base_->evaluate(x.segment(c * block, block), sigma);
  }
  return out;
}

Eigen::VectorXd score_of(const Denoiser& denoiser, const Eigen::VectorXd& x, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("score_of: sigma must be positive");
  return (denoiser.evaluate(x, sigma) - x) / (sigma * sigma);
}

Eigen::VectorXd ode_direction(const Denoiser& denoiser, const Eigen::VectorXd& x, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("ode_direction: sigma must be positive");
  return (x - denoiser.evaluate(x, sigma)) / sigma;
}

}  // namespace scorefuse
