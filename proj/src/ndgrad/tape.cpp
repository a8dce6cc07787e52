#include "tcs/ndgrad/tape.hpp"

#include "tcs/error.hpp"

namespace tcs::ndgrad {

const Matrix &Tensor::value() const {
  if (!tape_)
    throw UsageError("tensor is not bound to a tape");
  return tape_->value_of(id_);
}

Matrix Tensor::grad() const {
  if (!tape_)
    throw UsageError("tensor is not bound to a tape");
  return tape_->grad_of(id_);
}

Tensor Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Tensor(this, nodes_.size() - 1);
}

void Tape::check_owner(const Tensor &t) const {
  if (t.tape_ != this || t.id_ >= nodes_.size())
    throw UsageError("tensor belongs to a different or cleared tape");
}

Tensor Tape::constant(Matrix value) {
  if (!value.allFinite())
    throw NumericalError("non-finite entry in constant input");
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Tensor Tape::parameter(Parameter &p) {
  if (auto it = bound_.find(&p); it != bound_.end())
    return Tensor(this, it->second);
  if (!p.value.allFinite())
    throw NumericalError("non-finite entry in parameter '" + p.name + "'");
  Node n;
  n.value = p.value;
  n.param = &p;
  n.requires_grad = true;
  Tensor t = push(std::move(n));
  bound_.emplace(&p, t.id_);
  return t;
}

Tensor Tape::record(const char *op, Matrix value,
                    std::initializer_list<Tensor> parents, Backward backward) {
  return record(op, std::move(value), std::vector<Tensor>(parents),
                std::move(backward));
}

Tensor Tape::record(const char *op, Matrix value,
                    const std::vector<Tensor> &parents, Backward backward) {
  bool needs = false;
  for (const Tensor &p : parents) {
    check_owner(p);
    needs = needs || nodes_[p.id_].requires_grad;
  }
  if (!value.allFinite())
    throw NumericalError(std::string("non-finite activation in ") + op);
  Node n;
  n.value = std::move(value);
  n.requires_grad = needs;
  if (needs)
    n.backward = std::move(backward);
  return push(std::move(n));
}

Matrix Tape::grad_of(std::size_t id) const {
  const Node &n = nodes_.at(id);
  if (n.has_grad)
    return n.grad;
  return Matrix::Zero(n.value.rows(), n.value.cols());
}

void Tape::backward(const Tensor &loss) {
  if (nodes_.empty())
    throw UsageError("backward called before any forward pass was recorded");
  check_owner(loss);
  Node &root = nodes_[loss.id_];
  if (root.value.size() != 1)
    throw UsageError("backward requires a scalar loss");
  for (Node &n : nodes_) {
    n.has_grad = false;
    n.grad.resize(0, 0);
  }
  if (!root.requires_grad)
    return;
  root.grad = Matrix::Ones(1, 1);
  root.has_grad = true;
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node &n = nodes_[i];
    if (!n.has_grad)
      continue;
    if (n.backward) {
      n.backward(*this, n.value, n.grad);
    } else if (n.param) {
      if (!n.grad.allFinite())
        throw NumericalError("non-finite gradient for parameter '" +
                             n.param->name + "'");
      if (n.param->grad.rows() != n.grad.rows() ||
          n.param->grad.cols() != n.grad.cols())
        n.param->grad = n.grad;
      else
        n.param->grad += n.grad;
    }
  }
}

void Tape::clear() {
  nodes_.clear();
  bound_.clear();
}

} // namespace tcs::ndgrad
