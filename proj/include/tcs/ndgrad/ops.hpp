#pragma once

#include "tcs/ndgrad/tape.hpp"

#include <vector>

// Differentiable primitives over 2-D tensors. Every op checks shapes
// (StructuralError) and finiteness (NumericalError) on the way in.
namespace tcs::ndgrad {

Tensor matmul(const Tensor &a, const Tensor &b);
Tensor add(const Tensor &a, const Tensor &b);
Tensor sub(const Tensor &a, const Tensor &b);
// a (n x m) + row (1 x m), broadcast over rows.
Tensor add_row(const Tensor &a, const Tensor &row);
// Elementwise product.
Tensor mul(const Tensor &a, const Tensor &b);
// Elementwise product with a constant matrix of the same shape.
Tensor mul_const(const Tensor &a, const Matrix &c);
// scale * a + shift
Tensor affine(const Tensor &a, double scale, double shift);

Tensor sigmoid(const Tensor &a);
Tensor tanh(const Tensor &a);
Tensor softplus(const Tensor &a);
Tensor log(const Tensor &a);
Tensor square(const Tensor &a);
// Clips into [lo, hi]; gradient passes only where the input was inside.
Tensor clamp(const Tensor &a, double lo, double hi);

Tensor sum(const Tensor &a);
Tensor concat_cols(const std::vector<Tensor> &parts);
Tensor slice_cols(const Tensor &a, Eigen::Index start, Eigen::Index count);
Tensor concat_rows(const std::vector<Tensor> &parts);
Tensor slice_rows(const Tensor &a, Eigen::Index start, Eigen::Index count);
// Column-major reinterpretation with the same number of entries.
Tensor reshape(const Tensor &a, Eigen::Index rows, Eigen::Index cols);

inline Tensor operator+(const Tensor &a, const Tensor &b) { return add(a, b); }
inline Tensor operator-(const Tensor &a, const Tensor &b) { return sub(a, b); }
inline Tensor operator*(const Tensor &a, const Tensor &b) { return mul(a, b); }

// Probabilities are clamped to [kProbFloor, 1 - kProbFloor] before logs.
inline constexpr double kProbFloor = 1e-7;

} // namespace tcs::ndgrad
