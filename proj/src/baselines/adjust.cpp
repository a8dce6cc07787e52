#include "tcs/baselines/adjust.hpp"

#include "tcs/error.hpp"

#include <cmath>
#include <sstream>

namespace tcs::baselines {

namespace {

double clamp_p(double p) {
  return std::min(std::max(p, kMinPropensity), 1.0 - kMinPropensity);
}

double expit(double z) {
  if (z >= 0.0)
    return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logit_clamped(double q) {
  constexpr double eps = 1e-7;
  const double c = std::min(std::max(q, eps), 1.0 - eps);
  return std::log(c / (1.0 - c));
}

void check_aligned(const Matrix &a, const Matrix &b, const char *what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw StructuralError(std::string("adjustment: ") + what +
                          " not aligned with the outcome matrix");
}

void check_arms(const Matrix &treatment) {
  if (treatment.size() == 0)
    throw DataError("adjustment on an empty sample");
  const bool any1 = (treatment.array() > 0.5).any();
  const bool any0 = (treatment.array() <= 0.5).any();
  if (!(any0 && any1))
    throw DegenerateTreatmentError(
        any1 ? "adjustment: every subject-time is treated"
             : "adjustment: every subject-time is control");
}

struct ArmFit {
  double delta = 0.0;
  bool separated = false;
  double level = 0.0;
  int iterations = 0;
};

// One-parameter logistic fit y ~ expit(offset + delta h) by Newton steps with
// step halving on the log-likelihood.
ArmFit fit_arm(const std::vector<double> &y, const std::vector<double> &offset,
               const std::vector<double> &h, int t, const char *arm) {
  ArmFit fit;
  if (y.empty())
    return fit;
  bool any1 = false, any0 = false;
  for (double v : y)
    (v > 0.5 ? any1 : any0) = true;
  if (!(any0 && any1)) {
    fit.separated = true;
    fit.level = any1 ? 1.0 : 0.0;
    return fit;
  }
  const auto loglik = [&](double d) {
    double ll = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double z = offset[i] + d * h[i];
      // y z - log(1 + e^z)
      const double sp = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
      ll += y[i] * z - sp;
    }
    return ll;
  };
  double delta = 0.0;
  double ll = loglik(delta);
  for (int it = 1; it <= kFluctuationMaxIter; ++it) {
    double score = 0.0, info = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double p = expit(offset[i] + delta * h[i]);
      score += h[i] * (y[i] - p);
      info += h[i] * h[i] * p * (1.0 - p);
    }
    if (!(info > 0.0) || !std::isfinite(score)) {
      std::ostringstream msg;
      msg << "TMLE fluctuation (" << arm << " arm, step " << t + 1
          << ") has a singular information matrix at iteration " << it
          << ", delta=" << delta << ", score=" << score;
      throw AdjustmentError(msg.str());
    }
    double step = score / info;
    double next = delta + step;
    double ll_next = loglik(next);
    for (int halve = 0; halve < 50 && ll_next < ll; ++halve) {
      step *= 0.5;
      next = delta + step;
      ll_next = loglik(next);
    }
    delta = next;
    ll = ll_next;
    fit.iterations = it;
    if (std::abs(step) < kFluctuationTol) {
      fit.delta = delta;
      return fit;
    }
  }
  std::ostringstream msg;
  msg << "TMLE fluctuation (" << arm << " arm, step " << t + 1
      << ") did not converge in " << kFluctuationMaxIter
      << " iterations; delta=" << delta << ", log-likelihood=" << ll
      << ", n=" << y.size();
  throw AdjustmentError(msg.str());
}

} // namespace

Matrix ipw_terms(const Matrix &y_hat, const Matrix &treatment,
                 const Matrix &propensity) {
  check_aligned(y_hat, treatment, "treatment");
  check_aligned(y_hat, propensity, "propensity");
  check_arms(treatment);
  Matrix terms(y_hat.rows(), y_hat.cols());
  for (Eigen::Index i = 0; i < y_hat.rows(); ++i)
    for (Eigen::Index t = 0; t < y_hat.cols(); ++t) {
      const double a = treatment(i, t) > 0.5 ? 1.0 : 0.0;
      const double p = clamp_p(propensity(i, t));
      terms(i, t) = a * y_hat(i, t) / p - (1.0 - a) * y_hat(i, t) / (1.0 - p);
    }
  return terms;
}

Vector ipw_adjust(const Matrix &y_hat, const Matrix &treatment,
                  const Matrix &propensity) {
  return ipw_terms(y_hat, treatment, propensity).colwise().mean().transpose();
}

double targeted_update(double q, double delta, double h) {
  const double z = delta * h;
  if (z > 30.0)
    return 1.0 / (1.0 + (1.0 - q) / q * std::exp(-z));
  const double m = std::expm1(z);
  return q * (1.0 + m) / (1.0 + q * m);
}

FluctuationFit fit_fluctuation(const TmleInput &in, int t) {
  std::vector<double> y1, o1, h1, y0, o0, h0;
  for (Eigen::Index i = 0; i < in.y1.rows(); ++i) {
    if (in.known(i, t) < 0.5)
      continue;
    const double p = clamp_p(in.propensity(i, t));
    if (in.treatment(i, t) > 0.5) {
      y1.push_back(in.y_obs(i, t));
      o1.push_back(logit_clamped(in.y1(i, t)));
      h1.push_back(1.0 / p);
    } else {
      y0.push_back(in.y_obs(i, t));
      o0.push_back(logit_clamped(in.y0(i, t)));
      h0.push_back(1.0 / (1.0 - p));
    }
  }
  const ArmFit a1 = fit_arm(y1, o1, h1, t, "treated");
  const ArmFit a0 = fit_arm(y0, o0, h0, t, "control");
  FluctuationFit f;
  f.delta_1 = a1.delta;
  f.delta_0 = a0.delta;
  f.separated_1 = a1.separated;
  f.separated_0 = a0.separated;
  f.level_1 = a1.level;
  f.level_0 = a0.level;
  f.iterations = std::max(a1.iterations, a0.iterations);
  return f;
}

std::pair<Vector, Vector> targeted_outcomes(const TmleInput &in, int t,
                                            double delta_1, double delta_0) {
  const Eigen::Index n = in.y1.rows();
  Vector q1(n), q0(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = clamp_p(in.propensity(i, t));
    q1(i) = targeted_update(in.y1(i, t), delta_1, 1.0 / p);
    q0(i) = targeted_update(in.y0(i, t), delta_0, 1.0 / (1.0 - p));
  }
  return {q1, q0};
}

AdjustedATE tmle_adjust(const TmleInput &in) {
  check_aligned(in.y1, in.y0, "control outcomes");
  check_aligned(in.y1, in.y_obs, "observed outcomes");
  check_aligned(in.y1, in.known, "known-status mask");
  check_aligned(in.y1, in.treatment, "treatment");
  check_aligned(in.y1, in.propensity, "propensity");
  check_arms(in.treatment);
  const Eigen::Index q = in.y1.cols();
  AdjustedATE out;
  out.psi_tmle = out.psi_initial = out.delta_1 = out.delta_0 = Vector::Zero(q);
  Matrix y_arm(in.y1.rows(), q);
  for (Eigen::Index i = 0; i < y_arm.rows(); ++i)
    for (Eigen::Index t = 0; t < q; ++t)
      y_arm(i, t) = in.treatment(i, t) > 0.5 ? in.y1(i, t) : in.y0(i, t);
  out.psi_ipw = ipw_adjust(y_arm, in.treatment, in.propensity);
  for (int t = 0; t < static_cast<int>(q); ++t) {
    out.psi_initial(t) = (in.y1.col(t) - in.y0.col(t)).mean();
    const FluctuationFit f = fit_fluctuation(in, t);
    auto [q1, q0] = targeted_outcomes(in, t, f.delta_1, f.delta_0);
    if (f.separated_1)
      q1.setConstant(f.level_1);
    if (f.separated_0)
      q0.setConstant(f.level_0);
    out.psi_tmle(t) = (q1 - q0).mean();
    out.delta_1(t) = f.delta_1;
    out.delta_0(t) = f.delta_0;
    out.separated_1.push_back(f.separated_1 ? 1 : 0);
    out.separated_0.push_back(f.separated_0 ? 1 : 0);
    out.iterations.push_back(f.iterations);
  }
  return out;
}

} // namespace tcs::baselines
