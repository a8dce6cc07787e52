#include "tcs/ndgrad/optimizer.hpp"

#include "tcs/error.hpp"

#include <cmath>

namespace tcs::ndgrad {

Adam::Adam(std::vector<Parameter *> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  moments_.reserve(params_.size());
  for (const Parameter *p : params_)
    moments_.push_back({Matrix::Zero(p->value.rows(), p->value.cols()),
                        Matrix::Zero(p->value.rows(), p->value.cols())});
}

void Adam::step(double lr) {
  for (const Parameter *p : params_) {
    if (p->grad.rows() != p->value.rows() || p->grad.cols() != p->value.cols())
      throw StructuralError("gradient shape mismatch for '" + p->name + "'");
    if (!p->grad.allFinite())
      throw NumericalError("non-finite gradient for '" + p->name + "'");
  }
  ++steps_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter &p = *params_[k];
    Moments &s = moments_[k];
    s.m = b1 * s.m + (1.0 - b1) * p.grad;
    s.v = b2 * s.v + (1.0 - b2) * p.grad.cwiseAbs2();
    p.value.array() -= lr * (s.m.array() / c1) /
                       ((s.v.array() / c2).sqrt() + config_.eps);
  }
}

double clip_grad_norm(const std::vector<Parameter *> &params, double max_norm) {
  double sq = 0.0;
  for (const Parameter *p : params)
    sq += p->grad.squaredNorm();
  const double norm = std::sqrt(sq);
  if (std::isfinite(norm) && norm > max_norm && max_norm > 0.0) {
    const double s = max_norm / norm;
    for (Parameter *p : params)
      p->grad *= s;
  }
  return norm;
}

} // namespace tcs::ndgrad
