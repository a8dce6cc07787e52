#include "tcs/tcsnet/effects.hpp"

#include "tcs/error.hpp"

#include <algorithm>
#include <cmath>

namespace tcs::tcsnet {

Vector survival_curve(const Vector &theta) {
  Vector s(theta.size());
  double acc = 1.0;
  for (Eigen::Index t = 0; t < theta.size(); ++t) {
    acc *= 1.0 - theta(t);
    s(t) = acc;
  }
  return s;
}

Matrix survival_curves(const Matrix &theta) {
  Matrix s(theta.rows(), theta.cols());
  for (Eigen::Index i = 0; i < theta.rows(); ++i)
    s.row(i) = survival_curve(theta.row(i).transpose()).transpose();
  return s;
}

CounterfactualPrediction predict_member(const EnsembleModel &model, int member,
                                        const std::vector<LongitudinalSample> &samples) {
  const Member &m = model.members.at(static_cast<std::size_t>(member));
  auto &net = const_cast<OutcomeNet &>(m.net);
  std::vector<InputMatrix> obs, treated, control;
  obs.reserve(samples.size());
  treated.reserve(samples.size());
  control.reserve(samples.size());
  for (const LongitudinalSample &s : samples) {
    obs.push_back(member_lambda(m, model.standardizer, s));
    treated.push_back(counterfactual(obs.back(), 1));
    control.push_back(counterfactual(obs.back(), 0));
  }
  CounterfactualPrediction p;
  const Matrix y1 = net.predict(treated);
  const Matrix y0 = net.predict(control);
  const Matrix yo = net.predict(obs);
  if (model.kind() == ModelKind::Binary) {
    p.survival_1 = y1;
    p.survival_0 = y0;
    p.survival_obs = yo;
    p.hazard_1 = (1.0 - y1.array()).matrix();
    p.hazard_0 = (1.0 - y0.array()).matrix();
    p.hazard_obs = (1.0 - yo.array()).matrix();
  } else {
    p.hazard_1 = y1;
    p.hazard_0 = y0;
    p.hazard_obs = yo;
    p.survival_1 = survival_curves(y1);
    p.survival_0 = survival_curves(y0);
    p.survival_obs = survival_curves(yo);
  }
  return p;
}

std::vector<CounterfactualPrediction>
predict_members(const EnsembleModel &model,
                const std::vector<LongitudinalSample> &samples) {
  std::vector<CounterfactualPrediction> out;
  out.reserve(model.members.size());
  for (int m = 0; m < model.size(); ++m)
    out.push_back(predict_member(model, m, samples));
  return out;
}

namespace {

// Pulls a mean back inside its band when only summation rounding put it out.
double snap_into(double v, double lo, double hi) {
  constexpr double tol = 1e-12;
  if (v < lo && lo - v <= tol)
    return lo;
  if (v > hi && v - hi <= tol)
    return hi;
  return v;
}

} // namespace

double percentile(std::vector<double> values, double pct) {
  if (values.empty())
    throw UsageError("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return values[lo] + w * (values[hi] - values[lo]);
}

EffectEstimate aggregate_effects(const std::vector<CounterfactualPrediction> &members,
                                 const std::vector<LongitudinalSample> &samples,
                                 std::span<const int> rows) {
  if (rows.empty())
    throw SelectionError("effect estimation on an empty subgroup");
  if (members.empty())
    throw UsageError("effect estimation needs at least one member");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto q = members.front().hazard_1.cols();
  const auto K = members.size();
  EffectEstimate e;
  e.rows.assign(rows.begin(), rows.end());
  for (int r : rows)
    e.ids.push_back(samples.at(static_cast<std::size_t>(r)).id);
  e.ite = e.ite_lo = e.ite_hi = Matrix::Zero(n, q);
  e.survival_1 = e.survival_0 = e.survival_obs = Matrix::Zero(n, q);
  e.hazard_1 = e.hazard_0 = Matrix::Zero(n, q);
  e.cate = e.cate_lo = e.cate_hi = e.hr_star = Vector::Zero(q);

  std::vector<double> member_values(K);
  std::vector<Vector> member_cate(K, Vector::Zero(q));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index r = rows[static_cast<std::size_t>(i)];
    for (Eigen::Index t = 0; t < q; ++t) {
      double s1 = 0, s0 = 0, so = 0, h1 = 0, h0 = 0, ite = 0;
      for (std::size_t k = 0; k < K; ++k) {
        const CounterfactualPrediction &m = members[k];
        const double d = m.survival_1(r, t) - m.survival_0(r, t);
        member_values[k] = d;
        member_cate[k](t) += d;
        ite += d;
        s1 += m.survival_1(r, t);
        s0 += m.survival_0(r, t);
        so += m.survival_obs(r, t);
        h1 += m.hazard_1(r, t);
        h0 += m.hazard_0(r, t);
      }
      const double inv = 1.0 / static_cast<double>(K);
      e.ite_lo(i, t) = percentile(member_values, 2.5);
      e.ite_hi(i, t) = percentile(member_values, 97.5);
      e.ite(i, t) = snap_into(ite * inv, e.ite_lo(i, t), e.ite_hi(i, t));
      e.survival_1(i, t) = s1 * inv;
      e.survival_0(i, t) = s0 * inv;
      e.survival_obs(i, t) = so * inv;
      e.hazard_1(i, t) = h1 * inv;
      e.hazard_0(i, t) = h0 * inv;
      e.hr_star(t) +=
          e.hazard_0(i, t) / std::max(e.hazard_1(i, t), kHazardRatioFloor);
    }
  }
  e.hr_star /= static_cast<double>(n);
  e.cate = e.ite.colwise().mean().transpose();
  for (Eigen::Index t = 0; t < q; ++t) {
    for (std::size_t k = 0; k < K; ++k)
      member_values[k] = member_cate[k](t) / static_cast<double>(n);
    e.cate_lo(t) = percentile(member_values, 2.5);
    e.cate_hi(t) = percentile(member_values, 97.5);
    e.cate(t) = snap_into(e.cate(t), e.cate_lo(t), e.cate_hi(t));
  }
  return e;
}

EffectEstimate estimate_effects(const EnsembleModel &model,
                                const std::vector<LongitudinalSample> &samples,
                                const SubgroupFilter &filter) {
  std::vector<int> rows;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!filter || filter(samples[i]))
      rows.push_back(static_cast<int>(i));
  if (rows.empty())
    throw SelectionError("subgroup filter selected no subjects");
  std::vector<LongitudinalSample> chosen;
  chosen.reserve(rows.size());
  for (int r : rows)
    chosen.push_back(samples[static_cast<std::size_t>(r)]);
  const auto members = predict_members(model, chosen);
  std::vector<int> local(rows.size());
  for (std::size_t i = 0; i < local.size(); ++i)
    local[i] = static_cast<int>(i);
  EffectEstimate e = aggregate_effects(members, chosen, local);
  e.rows = rows;
  return e;
}

} // namespace tcs::tcsnet
