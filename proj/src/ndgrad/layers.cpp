#include "tcs/ndgrad/layers.hpp"

#include "tcs/error.hpp"

#include <cmath>

namespace tcs::ndgrad {

Matrix fan_in_uniform(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in,
                      Rng &rng) {
  const double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  // Fill row-major so the draw order does not depend on storage order.
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = dist(rng);
  return m;
}

Dense::Dense(const std::string &name, int in, int out, Rng &rng)
    : weight(name + "/weight", fan_in_uniform(in, out, in, rng)),
      bias(name + "/bias", fan_in_uniform(1, out, in, rng)) {}

Tensor Dense::forward(Tape &tape, const Tensor &x) {
  if (x.cols() != in())
    throw StructuralError(weight.name + ": expected input width " +
                          std::to_string(in()) + ", got " +
                          std::to_string(x.cols()));
  return add_row(matmul(x, tape.parameter(weight)), tape.parameter(bias));
}

LstmCell::LstmCell(const std::string &name, int in, int hidden, Rng &rng)
    : w_input(name + "/w_input", fan_in_uniform(in, 4 * hidden, in, rng)),
      w_hidden(name + "/w_hidden",
               fan_in_uniform(hidden, 4 * hidden, hidden, rng)),
      bias(name + "/bias", Matrix::Zero(1, 4 * hidden)) {
  // Forget gate starts open.
  bias.value.middleCols(hidden, hidden).setOnes();
}

LstmCell::State LstmCell::initial_state(Tape &tape, Eigen::Index batch) const {
  return {tape.constant(Matrix::Zero(batch, hidden())),
          tape.constant(Matrix::Zero(batch, hidden()))};
}

namespace {

struct Gates {
  Eigen::ArrayXXd i, f, g, o;
};

Gates activate(const Matrix &z, Eigen::Index H) {
  const auto sig = [](const auto &x) { return 1.0 / (1.0 + (-x).exp()); };
  return {sig(z.middleCols(0, H).array()), sig(z.middleCols(H, H).array()),
          z.middleCols(2 * H, H).array().tanh(),
          sig(z.middleCols(3 * H, H).array())};
}

// Fused gate nonlinearity. Output is [h' | c'].
Tensor lstm_update(const Tensor &z, const Tensor &c_prev) {
  Tape &tape = *z.tape();
  const Eigen::Index H = c_prev.cols();
  const Gates gt = activate(z.value(), H);
  const Eigen::ArrayXXd c = gt.f * c_prev.value().array() + gt.i * gt.g;
  Matrix out(z.rows(), 2 * H);
  out.leftCols(H) = (gt.o * c.tanh()).matrix();
  out.rightCols(H) = c.matrix();
  return tape.record(
      "lstm_update", std::move(out), {z, c_prev},
      [z, c_prev, H](Tape &tp, const Matrix &y, const Matrix &grad) {
        const Gates g = activate(z.value(), H);
        const Eigen::ArrayXXd tc = y.rightCols(H).array().tanh();
        const Eigen::ArrayXXd gh = grad.leftCols(H).array();
        const Eigen::ArrayXXd dc =
            grad.rightCols(H).array() + gh * g.o * (1.0 - tc.square());
        Matrix dz(z.rows(), 4 * H);
        dz.middleCols(0, H) = (dc * g.g * g.i * (1.0 - g.i)).matrix();
        dz.middleCols(H, H) =
            (dc * c_prev.value().array() * g.f * (1.0 - g.f)).matrix();
        dz.middleCols(2 * H, H) = (dc * g.i * (1.0 - g.g.square())).matrix();
        dz.middleCols(3 * H, H) = (gh * tc * g.o * (1.0 - g.o)).matrix();
        tp.accumulate(z, dz);
        if (tp.requires_grad(c_prev))
          tp.accumulate(c_prev, (dc * g.f).matrix());
      });
}

} // namespace

LstmCell::State LstmCell::step(Tape &tape, const Tensor &x, const State &prev) {
  if (x.cols() != in())
    throw StructuralError(w_input.name + ": expected input width " +
                          std::to_string(in()) + ", got " +
                          std::to_string(x.cols()));
  if (prev.h.cols() != hidden() || prev.c.cols() != hidden() ||
      prev.h.rows() != x.rows())
    throw StructuralError(w_input.name + ": recurrent state shape mismatch");
  Tensor z = add_row(add(matmul(x, tape.parameter(w_input)),
                         matmul(prev.h, tape.parameter(w_hidden))),
                     tape.parameter(bias));
  Tensor hc = lstm_update(z, prev.c);
  const Eigen::Index H = hidden();
  return {slice_cols(hc, 0, H), slice_cols(hc, H, H)};
}

Tensor LstmCell::project(Tape &tape, const Tensor &x) {
  if (x.cols() != in())
    throw StructuralError(w_input.name + ": expected input width " +
                          std::to_string(in()) + ", got " +
                          std::to_string(x.cols()));
  return matmul(x, tape.parameter(w_input));
}

LstmCell::State LstmCell::step_projected(Tape &tape, const Tensor &zx,
                                         const State &prev) {
  if (zx.cols() != 4 * hidden() || prev.h.cols() != hidden() ||
      prev.c.cols() != hidden() || prev.h.rows() != zx.rows())
    throw StructuralError(w_input.name + ": recurrent state shape mismatch");
  Tensor z = add_row(add(zx, matmul(prev.h, tape.parameter(w_hidden))),
                     tape.parameter(bias));
  Tensor hc = lstm_update(z, prev.c);
  const Eigen::Index H = hidden();
  return {slice_cols(hc, 0, H), slice_cols(hc, H, H)};
}

void zero_grads(const std::vector<Parameter *> &params) {
  for (Parameter *p : params)
    p->zero_grad();
}

std::size_t parameter_count(const std::vector<Parameter *> &params) {
  std::size_t n = 0;
  for (const Parameter *p : params)
    n += static_cast<std::size_t>(p->size());
  return n;
}

} // namespace tcs::ndgrad
