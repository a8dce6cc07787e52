#pragma once

#include "tcs/ndgrad/ops.hpp"
#include "tcs/seeds.hpp"

#include <string>
#include <vector>

namespace tcs::ndgrad {

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Matrix fan_in_uniform(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in,
                      Rng &rng);

// y = x W + b
class Dense {
public:
  Dense() = default;
  Dense(const std::string &name, int in, int out, Rng &rng);

  Tensor forward(Tape &tape, const Tensor &x);
  std::vector<Parameter *> parameters() { return {&weight, &bias}; }

  int in() const { return static_cast<int>(weight.value.rows()); }
  int out() const { return static_cast<int>(weight.value.cols()); }

  Parameter weight; // in x out
  Parameter bias;   // 1 x out
};

// LSTM cell; gate blocks are laid out [input | forget | candidate | output]
// along the columns of every parameter.
class LstmCell {
public:
  struct State {
    Tensor h;
    Tensor c;
  };

  LstmCell() = default;
  LstmCell(const std::string &name, int in, int hidden, Rng &rng);

  State initial_state(Tape &tape, Eigen::Index batch) const;
  State step(Tape &tape, const Tensor &x, const State &prev);
  // Input projection x W_input for a stack of steps, computed once.
  Tensor project(Tape &tape, const Tensor &x);
  // Step from a precomputed row block of project().
  State step_projected(Tape &tape, const Tensor &zx, const State &prev);
  std::vector<Parameter *> parameters() {
    return {&w_input, &w_hidden, &bias};
  }

  int in() const { return static_cast<int>(w_input.value.rows()); }
  int hidden() const { return static_cast<int>(w_hidden.value.rows()); }

  Parameter w_input;  // in x 4H
  Parameter w_hidden; // H x 4H
  Parameter bias;     // 1 x 4H
};

void zero_grads(const std::vector<Parameter *> &params);
std::size_t parameter_count(const std::vector<Parameter *> &params);

} // namespace tcs::ndgrad
