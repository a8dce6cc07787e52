#pragma once

#include "tcs/ndgrad/tape.hpp"

#include <vector>

namespace tcs::ndgrad {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adaptive moment estimation over a fixed parameter list. Reads
// Parameter::grad and updates Parameter::value in place.
class Adam {
public:
  struct Moments {
    Matrix m;
    Matrix v;
  };

  Adam() = default;
  explicit Adam(std::vector<Parameter *> params, AdamConfig config = {});

  // Throws NumericalError on a non-finite gradient, before touching any
  // parameter.
  void step() { step(config_.lr); }
  void step(double lr);

  const std::vector<Moments> &moments() const { return moments_; }
  long steps() const { return steps_; }
  const AdamConfig &config() const { return config_; }

private:
  std::vector<Parameter *> params_;
  std::vector<Moments> moments_;
  AdamConfig config_;
  long steps_ = 0;
};

// Rescales gradients so their global L2 norm is at most max_norm. Returns the
// norm before clipping.
double clip_grad_norm(const std::vector<Parameter *> &params, double max_norm);

} // namespace tcs::ndgrad
