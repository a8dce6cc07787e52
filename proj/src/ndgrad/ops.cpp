#include "tcs/ndgrad/ops.hpp"

#include "tcs/error.hpp"

#include <cmath>

namespace tcs::ndgrad {
namespace {

Tape &tape_of(const Tensor &a) {
  if (!a.valid())
    throw UsageError("operation on an unbound tensor");
  return *a.tape();
}

Tape &tape_of(const Tensor &a, const Tensor &b) {
  Tape &t = tape_of(a);
  if (b.tape() != &t)
    throw UsageError("operands recorded on different tapes");
  return t;
}

std::string shape_str(const Tensor &t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

void same_shape(const char *op, const Tensor &a, const Tensor &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw StructuralError(std::string(op) + ": shape mismatch " +
                          shape_str(a) + " vs " + shape_str(b));
}

double stable_sigmoid(double z) {
  if (z >= 0.0)
    return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double stable_softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

} // namespace

Tensor matmul(const Tensor &a, const Tensor &b) {
  Tape &t = tape_of(a, b);
  if (a.cols() != b.rows())
    throw StructuralError("matmul: inner dimensions differ " + shape_str(a) +
                          " * " + shape_str(b));
  Matrix out = a.value() * b.value();
  return t.record("matmul", std::move(out), {a, b},
                  [a, b](Tape &tp, const Matrix &, const Matrix &g) {
                    if (tp.requires_grad(a))
                      tp.accumulate(a, g * b.value().transpose());
                    if (tp.requires_grad(b))
                      tp.accumulate(b, a.value().transpose() * g);
                  });
}

Tensor add(const Tensor &a, const Tensor &b) {
  Tape &t = tape_of(a, b);
  same_shape("add", a, b);
  return t.record("add", a.value() + b.value(), {a, b},
                  [a, b](Tape &tp, const Matrix &, const Matrix &g) {
                    tp.accumulate(a, g);
                    tp.accumulate(b, g);
                  });
}

Tensor sub(const Tensor &a, const Tensor &b) {
  Tape &t = tape_of(a, b);
  same_shape("sub", a, b);
  return t.record("sub", a.value() - b.value(), {a, b},
                  [a, b](Tape &tp, const Matrix &, const Matrix &g) {
                    tp.accumulate(a, g);
                    tp.accumulate(b, -g);
                  });
}

Tensor add_row(const Tensor &a, const Tensor &row) {
  Tape &t = tape_of(a, row);
  if (row.rows() != 1 || row.cols() != a.cols())
    throw StructuralError("add_row: expected 1x" + std::to_string(a.cols()) +
                          " row, got " + shape_str(row));
  Matrix out = a.value().rowwise() + row.value().row(0);
  return t.record("add_row", std::move(out), {a, row},
                  [a, row](Tape &tp, const Matrix &, const Matrix &g) {
                    tp.accumulate(a, g);
                    if (tp.requires_grad(row))
                      tp.accumulate(row, g.colwise().sum());
                  });
}

Tensor mul(const Tensor &a, const Tensor &b) {
  Tape &t = tape_of(a, b);
  same_shape("mul", a, b);
  return t.record("mul", a.value().cwiseProduct(b.value()), {a, b},
                  [a, b](Tape &tp, const Matrix &, const Matrix &g) {
                    if (tp.requires_grad(a))
                      tp.accumulate(a, g.cwiseProduct(b.value()));
                    if (tp.requires_grad(b))
                      tp.accumulate(b, g.cwiseProduct(a.value()));
                  });
}

Tensor mul_const(const Tensor &a, const Matrix &c) {
  Tape &t = tape_of(a);
  if (a.rows() != c.rows() || a.cols() != c.cols())
    throw StructuralError("mul_const: shape mismatch " + shape_str(a));
  return t.record("mul_const", a.value().cwiseProduct(c), {a},
                  [a, c](Tape &tp, const Matrix &, const Matrix &g) {
                    tp.accumulate(a, g.cwiseProduct(c));
                  });
}

Tensor affine(const Tensor &a, double scale, double shift) {
  Tape &t = tape_of(a);
  Matrix out = (a.value().array() * scale + shift).matrix();
  return t.record("affine", std::move(out), {a},
                  [a, scale](Tape &tp, const Matrix &, const Matrix &g) {
                    tp.accumulate(a, g * scale);
                  });
}

Tensor sigmoid(const Tensor &a) {
  Tape &t = tape_of(a);
  Matrix out = a.value().unaryExpr(&stable_sigmoid);
  return t.record("sigmoid", std::move(out), {a},
                  [a](Tape &tp, const Matrix &y, const Matrix &g) {
                    tp.accumulate(a, (g.array() * y.array() * (1.0 - y.array()))
                                         .matrix());
                  });
}

Tensor tanh(const Tensor &a) {
  Tape &t = tape_of(a);
  Matrix out = a.value().array().tanh().matrix();
  return t.record("tanh", std::move(out), {a},
                  [a](Tape &tp, const Matrix &y, const Matrix &g) {
                    tp.accumulate(a, (g.array() * (1.0 - y.array().square()))
                                         .matrix());
                  });
}

Tensor softplus(const Tensor &a) {
  Tape &t = tape_of(a);
  Matrix out = a.value().unaryExpr(&stable_softplus);
  return t.record("softplus", std::move(out), {a},
                  [a](Tape &tp, const Matrix &, const Matrix &g) {
                    tp.accumulate(a, g.cwiseProduct(
                                         a.value().unaryExpr(&stable_sigmoid)));
                  });
}

Tensor log(const Tensor &a) {
  Tape &t = tape_of(a);
  if ((a.value().array() <= 0.0).any())
    throw NumericalError("log of a non-positive entry");
  Matrix out = a.value().array().log().matrix();
  return t.record("log", std::move(out), {a},
                  [a](Tape &tp, const Matrix &, const Matrix &g) {
                    tp.accumulate(a, (g.array() / a.value().array()).matrix());
                  });
}

Tensor square(const Tensor &a) {
  Tape &t = tape_of(a);
  return t.record("square", a.value().array().square().matrix(), {a},
                  [a](Tape &tp, const Matrix &, const Matrix &g) {
                    tp.accumulate(a, (2.0 * g.array() * a.value().array())
                                         .matrix());
                  });
}

Tensor clamp(const Tensor &a, double lo, double hi) {
  Tape &t = tape_of(a);
  Matrix out = a.value().cwiseMax(lo).cwiseMin(hi);
  return t.record("clamp", std::move(out), {a},
                  [a, lo, hi](Tape &tp, const Matrix &, const Matrix &g) {
                    const auto &x = a.value().array();
                    tp.accumulate(a, ((x >= lo && x <= hi).cast<double>() *
                                      g.array())
                                         .matrix());
                  });
}

Tensor sum(const Tensor &a) {
  Tape &t = tape_of(a);
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  const Eigen::Index r = a.rows(), c = a.cols();
  return t.record("sum", std::move(out), {a},
                  [a, r, c](Tape &tp, const Matrix &, const Matrix &g) {
                    tp.accumulate(a, Matrix::Constant(r, c, g(0, 0)));
                  });
}

Tensor concat_cols(const std::vector<Tensor> &parts) {
  if (parts.empty())
    throw StructuralError("concat_cols: no inputs");
  Tape &t = tape_of(parts.front());
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const Tensor &p : parts) {
    if (p.tape() != &t)
      throw UsageError("operands recorded on different tapes");
    if (p.rows() != rows)
      throw StructuralError("concat_cols: row count mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (const Tensor &p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return t.record("concat_cols", std::move(out), parts,
                  [parts](Tape &tp, const Matrix &, const Matrix &g) {
                    Eigen::Index off = 0;
                    for (const Tensor &p : parts) {
                      if (tp.requires_grad(p))
                        tp.accumulate(p, g.middleCols(off, p.cols()));
                      off += p.cols();
                    }
                  });
}

Tensor slice_cols(const Tensor &a, Eigen::Index start, Eigen::Index count) {
  Tape &t = tape_of(a);
  if (start < 0 || count < 0 || start + count > a.cols())
    throw StructuralError("slice_cols: range out of bounds for " +
                          shape_str(a));
  Matrix out = a.value().middleCols(start, count);
  const Eigen::Index r = a.rows(), c = a.cols();
  return t.record("slice_cols", std::move(out), {a},
                  [a, start, count, r, c](Tape &tp, const Matrix &,
                                          const Matrix &g) {
                    Matrix full = Matrix::Zero(r, c);
                    full.middleCols(start, count) = g;
                    tp.accumulate(a, full);
                  });
}

Tensor concat_rows(const std::vector<Tensor> &parts) {
  if (parts.empty())
    throw StructuralError("concat_rows: no inputs");
  Tape &t = tape_of(parts.front());
  const Eigen::Index cols = parts.front().cols();
  Eigen::Index rows = 0;
  for (const Tensor &p : parts) {
    if (p.tape() != &t)
      throw UsageError("operands recorded on different tapes");
    if (p.cols() != cols)
      throw StructuralError("concat_rows: column count mismatch");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (const Tensor &p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    at += p.rows();
  }
  return t.record("concat_rows", std::move(out), parts,
                  [parts](Tape &tp, const Matrix &, const Matrix &g) {
                    Eigen::Index off = 0;
                    for (const Tensor &p : parts) {
                      if (tp.requires_grad(p))
                        tp.accumulate(p, g.middleRows(off, p.rows()));
                      off += p.rows();
                    }
                  });
}

Tensor slice_rows(const Tensor &a, Eigen::Index start, Eigen::Index count) {
  Tape &t = tape_of(a);
  if (start < 0 || count < 0 || start + count > a.rows())
    throw StructuralError("slice_rows: range out of bounds for " +
                          shape_str(a));
  Matrix out = a.value().middleRows(start, count);
  const Eigen::Index r = a.rows(), c = a.cols();
  return t.record("slice_rows", std::move(out), {a},
                  [a, start, count, r, c](Tape &tp, const Matrix &,
                                          const Matrix &g) {
                    if (!tp.requires_grad(a))
                      return;
                    Matrix full = Matrix::Zero(r, c);
                    full.middleRows(start, count) = g;
                    tp.accumulate(a, full);
                  });
}

Tensor reshape(const Tensor &a, Eigen::Index rows, Eigen::Index cols) {
  Tape &t = tape_of(a);
  if (rows < 0 || cols < 0 || rows * cols != a.value().size())
    throw StructuralError("reshape: cannot view " + shape_str(a) + " as " +
                          std::to_string(rows) + "x" + std::to_string(cols));
  const Matrix &v = a.value();
  Matrix out = Eigen::Map<const Matrix>(v.data(), rows, cols);
  const Eigen::Index r = a.rows(), c = a.cols();
  return t.record("reshape", std::move(out), {a},
                  [a, r, c](Tape &tp, const Matrix &, const Matrix &g) {
                    tp.accumulate(a, Eigen::Map<const Matrix>(g.data(), r, c));
                  });
}

} // namespace tcs::ndgrad
