#pragma once

#include "tcs/sample.hpp"

#include <array>
#include <deque>
#include <functional>
#include <initializer_list>
#include <string>
#include <unordered_map>

namespace tcs::ndgrad {

using tcs::Matrix;

// A trainable matrix with its accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)),
        grad(Matrix::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
  Eigen::Index size() const { return value.size(); }
};

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape
// lives and has not been cleared.
class Tensor {
public:
  Tensor() = default;

  const Matrix &value() const;
  // Gradient of the last backward() target with respect to this node; a zero
  // matrix when no gradient reached it.
  Matrix grad() const;
  std::array<Eigen::Index, 2> shape() const { return {rows(), cols()}; }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }

  bool valid() const { return tape_ != nullptr; }
  Tape *tape() const { return tape_; }
  std::size_t id() const { return id_; }

private:
  friend class Tape;
  Tensor(Tape *tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape *tape_ = nullptr;
  std::size_t id_ = 0;
};

// Reverse-mode tape. Operations append nodes; backward() walks them in reverse
// and accumulates parameter gradients into Parameter::grad.
class Tape {
public:
  // Receives the node's forward value and its incoming gradient.
  using Backward =
      std::function<void(Tape &, const Matrix &value, const Matrix &grad)>;

  Tape() = default;
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  Tensor constant(Matrix value);
  // Binds a parameter; repeated calls within one recording reuse the node.
  Tensor parameter(Parameter &p);

  // Records a differentiable operation. Throws NumericalError when the value
  // has non-finite entries.
  Tensor record(const char *op, Matrix value,
                std::initializer_list<Tensor> parents, Backward backward);
  Tensor record(const char *op, Matrix value, const std::vector<Tensor> &parents,
                Backward backward);

  template <class Derived>
  void accumulate(const Tensor &t, const Eigen::MatrixBase<Derived> &g) {
    Node &n = nodes_[t.id_];
    if (!n.requires_grad)
      return;
    if (!n.has_grad) {
      n.grad = g;
      n.has_grad = true;
    } else {
      n.grad += g;
    }
  }

  bool requires_grad(const Tensor &t) const {
    return nodes_[t.id_].requires_grad;
  }

  // Propagates d(loss)/d(node) for every recorded node and adds the parameter
  // gradients into Parameter::grad. The loss must be a 1x1 tensor of this tape.
  void backward(const Tensor &loss);

  void clear();
  std::size_t size() const { return nodes_.size(); }

  const Matrix &value_of(std::size_t id) const { return nodes_[id].value; }
  Matrix grad_of(std::size_t id) const;

private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    Parameter *param = nullptr;
    bool requires_grad = false;
    bool has_grad = false;
  };

  Tensor push(Node node);
  void check_owner(const Tensor &t) const;

  std::deque<Node> nodes_;
  std::unordered_map<const Parameter *, std::size_t> bound_;
};

} // namespace tcs::ndgrad
