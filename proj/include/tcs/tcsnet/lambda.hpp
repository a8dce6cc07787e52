#pragma once

#include "tcs/sample.hpp"

#include <json.hpp>

#include <span>
#include <vector>

namespace tcs::tcsnet {

// Column layout of one input matrix. Rows are prediction times t = 0..q-1;
// row t predicts follow-up step t + 1 (grid step u + 1 + t) and exposes the
// covariates of grid steps 1..u+1+t. Later entries carry the missing marker
// (mask 0, value 0).
//
//   [p | X (u+q)D | M (u+q)D | delta (u+q)D | a]
//
// p is present only for networks with a propensity layer. Block entries for
// grid step s and dimension d sit at offset (s-1)*D + d.
struct LambdaLayout {
  int history = 0;
  int followup = 0;
  int dims = 0;
  bool propensity = true;

  int steps() const { return history + followup; }
  int block() const { return steps() * dims; }
  int width() const { return (propensity ? 1 : 0) + 3 * block() + 1; }
  int p_col() const { return propensity ? 0 : -1; }
  int x_col(int s, int d) const { return (propensity ? 1 : 0) + (s - 1) * dims + d; }
  int m_col(int s, int d) const { return x_col(s, d) + block(); }
  int delta_col(int s, int d) const { return x_col(s, d) + 2 * block(); }
  int a_col() const { return width() - 1; }
  // Last grid step visible in row t.
  int visible_until(int t) const { return history + 1 + t; }

  bool operator==(const LambdaLayout &) const = default;
};

void to_json(nlohmann::json &j, const LambdaLayout &l);
void from_json(const nlohmann::json &j, LambdaLayout &l);

struct InputMatrix {
  LambdaLayout layout;
  Matrix values; // q x width

  int rows() const { return static_cast<int>(values.rows()); }
  int treatment(int t) const {
    return values(t, layout.a_col()) > 0.5 ? 1 : 0;
  }
};

// Per-dimension affine scaling of covariates, fitted on observed entries.
class Standardizer {
public:
  Standardizer() = default;
  explicit Standardizer(int dims)
      : mean_(Vector::Zero(dims)), scale_(Vector::Ones(dims)) {}

  static Standardizer fit(const std::vector<LongitudinalSample> &samples);

  double apply(double x, int d) const { return (x - mean_(d)) / scale_(d); }
  int dims() const { return static_cast<int>(mean_.size()); }
  const Vector &mean() const { return mean_; }
  const Vector &scale() const { return scale_; }

  friend void to_json(nlohmann::json &j, const Standardizer &s);
  friend void from_json(const nlohmann::json &j, Standardizer &s);

private:
  Vector mean_;
  Vector scale_;
};

// With a propensity column; p_trace[t] fills row t and must have length q.
// Throws StructuralError on a length or dimension mismatch.
InputMatrix assemble_lambda(const LongitudinalSample &sample,
                            std::span<const double> p_trace,
                            const Standardizer &standardizer);
// Without a propensity column.
InputMatrix assemble_lambda(const LongitudinalSample &sample,
                            const Standardizer &standardizer);

// Copy with every treatment entry set to a.
InputMatrix counterfactual(const InputMatrix &lambda, int a);

} // namespace tcs::tcsnet
