#include "tcs/tcsnet/lambda.hpp"

#include "tcs/error.hpp"
#include "tcs/ndgrad/masking.hpp"

#include <cmath>

namespace tcs::tcsnet {

void to_json(nlohmann::json &j, const LambdaLayout &l) {
  j = {{"history", l.history},
       {"followup", l.followup},
       {"dims", l.dims},
       {"propensity", l.propensity}};
}

void from_json(const nlohmann::json &j, LambdaLayout &l) {
  l.history = j.at("history").get<int>();
  l.followup = j.at("followup").get<int>();
  l.dims = j.at("dims").get<int>();
  l.propensity = j.at("propensity").get<bool>();
}

Standardizer Standardizer::fit(const std::vector<LongitudinalSample> &samples) {
  if (samples.empty())
    throw DataError("cannot fit a standardizer on an empty sample");
  const int D = samples.front().dims();
  Vector sum = Vector::Zero(D), sq = Vector::Zero(D);
  Eigen::VectorXi count = Eigen::VectorXi::Zero(D);
  for (const LongitudinalSample &s : samples) {
    if (s.dims() != D)
      throw StructuralError("standardizer: inconsistent covariate dimension");
    for (int r = 0; r < s.steps(); ++r)
      for (int d = 0; d < D; ++d)
        if (s.mask(r, d)) {
          sum(d) += s.x(r, d);
          sq(d) += s.x(r, d) * s.x(r, d);
          ++count(d);
        }
  }
  Standardizer st(D);
  for (int d = 0; d < D; ++d) {
    if (count(d) == 0)
      continue;
    const double m = sum(d) / count(d);
    const double var = sq(d) / count(d) - m * m;
    st.mean_(d) = m;
    st.scale_(d) = var > 1e-12 ? std::sqrt(var) : 1.0;
  }
  return st;
}

void to_json(nlohmann::json &j, const Standardizer &s) {
  j = {{"mean", std::vector<double>(s.mean_.begin(), s.mean_.end())},
       {"scale", std::vector<double>(s.scale_.begin(), s.scale_.end())}};
}

void from_json(const nlohmann::json &j, Standardizer &s) {
  const auto m = j.at("mean").get<std::vector<double>>();
  const auto c = j.at("scale").get<std::vector<double>>();
  if (m.size() != c.size())
    throw StructuralError("standardizer: mean/scale length mismatch");
  s.mean_ = Eigen::Map<const Vector>(m.data(), static_cast<Eigen::Index>(m.size()));
  s.scale_ = Eigen::Map<const Vector>(c.data(), static_cast<Eigen::Index>(c.size()));
}

namespace {

InputMatrix build(const LongitudinalSample &sample, const double *p_trace,
                  const Standardizer &st, bool propensity) {
  LambdaLayout L{sample.history, sample.followup, sample.dims(), propensity};
  if (st.dims() != L.dims)
    throw StructuralError("assemble_lambda: standardizer has " +
                          std::to_string(st.dims()) + " dims, sample has " +
                          std::to_string(L.dims));
  const int q = L.followup, T = L.steps(), D = L.dims;
  const double scale = 1.0 / T;
  InputMatrix out{L, Matrix::Zero(q, L.width())};
  for (int t = 0; t < q; ++t) {
    auto row = out.values.row(t);
    if (propensity)
      row(L.p_col()) = p_trace[t];
    const int last = L.visible_until(t);
    MaskMatrix visible = sample.mask;
    visible.bottomRows(T - last).setZero();
    const Matrix delta = ndgrad::time_since_observed(visible);
    for (int s = 1; s <= T; ++s)
      for (int d = 0; d < D; ++d) {
        row(L.delta_col(s, d)) = delta(s - 1, d) * scale;
        if (visible(s - 1, d)) {
          row(L.x_col(s, d)) = st.apply(sample.x(s - 1, d), d);
          row(L.m_col(s, d)) = 1.0;
        }
      }
    row(L.a_col()) = sample.treatment[static_cast<std::size_t>(L.history + t)];
  }
  return out;
}

} // namespace

InputMatrix assemble_lambda(const LongitudinalSample &sample,
                            std::span<const double> p_trace,
                            const Standardizer &standardizer) {
  if (static_cast<int>(p_trace.size()) != sample.followup)
    throw StructuralError("assemble_lambda: propensity trace has length " +
                          std::to_string(p_trace.size()) + ", expected " +
                          std::to_string(sample.followup));
  return build(sample, p_trace.data(), standardizer, true);
}

InputMatrix assemble_lambda(const LongitudinalSample &sample,
                            const Standardizer &standardizer) {
  return build(sample, nullptr, standardizer, false);
}

InputMatrix counterfactual(const InputMatrix &lambda, int a) {
  if (a != 0 && a != 1)
    throw UsageError("counterfactual treatment must be 0 or 1");
  InputMatrix out = lambda;
  out.values.col(out.layout.a_col()).setConstant(a);
  return out;
}

} // namespace tcs::tcsnet
