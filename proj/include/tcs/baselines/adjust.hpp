#pragma once

#include "tcs/sample.hpp"

#include <vector>

namespace tcs::baselines {

// Propensities are clamped into [kMinPropensity, 1 - kMinPropensity].
inline constexpr double kMinPropensity = 0.01;

// All inputs are N x q (subjects x follow-up steps); treatment and
// propensity are the time-t values.
//
// psi(t) = (1/N) sum_i [A Y / P - (1 - A) Y / (1 - P)]. Throws
// DegenerateTreatmentError when every entry of A falls in one arm.
Vector ipw_adjust(const Matrix &y_hat, const Matrix &treatment,
                  const Matrix &propensity);

// Per-subject IPW terms, N x q; ipw_adjust is their column mean.
Matrix ipw_terms(const Matrix &y_hat, const Matrix &treatment,
                 const Matrix &propensity);

struct AdjustedATE {
  Vector psi_ipw;
  Vector psi_tmle;
  Vector psi_initial; // plug-in mean of y1 - y0
  Vector delta_1;
  Vector delta_0;
  // Arms whose known outcomes are all equal at t; their targeted outcome is
  // that constant (the limit of the fluctuation) and delta is reported as 0.
  std::vector<int> separated_1;
  std::vector<int> separated_0;
  std::vector<int> iterations;
};

struct TmleInput {
  Matrix y1;         // initial P(no event by t) under treatment
  Matrix y0;         // under control
  Matrix y_obs;      // observed I(no event by t)
  Matrix known;      // 1 where the status at t is observed
  Matrix treatment;  // A(t)
  Matrix propensity; // P(A(t) = 1)
};

struct FluctuationFit {
  double delta_1 = 0.0;
  double delta_0 = 0.0;
  bool separated_1 = false;
  bool separated_0 = false;
  double level_1 = 0.0; // constant outcome of a separated arm
  double level_0 = 0.0;
  int iterations = 0;
};

inline constexpr double kFluctuationTol = 1e-8;
inline constexpr int kFluctuationMaxIter = 100;

// Intercept-free logistic regression of y_obs on (H1, H0) with offset
// logit(Q_A) over subjects with known status at step t (0-based column).
// Throws AdjustmentError when the fit does not converge.
FluctuationFit fit_fluctuation(const TmleInput &in, int t);

// Q* = expit(logit(Q) + delta H), evaluated so that delta = 0 returns Q
// exactly.
double targeted_update(double q, double delta, double h);

// Steps 1-4 of targeted estimation per t, plus the IPW estimate on
// Y_A = (A ? y1 : y0). Throws DegenerateTreatmentError for a one-arm sample.
AdjustedATE tmle_adjust(const TmleInput &in);

// Step 3 with fixed coefficients; returns (targeted y1, targeted y0) at t.
std::pair<Vector, Vector> targeted_outcomes(const TmleInput &in, int t,
                                            double delta_1, double delta_0);

} // namespace tcs::baselines
