#include "tcs/baselines/adjust.hpp"
#include "tcs/baselines/kaplan_meier.hpp"
#include "tcs/baselines/models.hpp"
#include "tcs/error.hpp"
#include "tcs/simgen/generator.hpp"
#include "tcs/tcsnet/effects.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace tcs;
using namespace tcs::baselines;

namespace {

Matrix uniform(Eigen::Index r, Eigen::Index c, std::mt19937_64 &rng, double lo,
               double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = u(rng);
  return m;
}

Matrix bernoulli(const Matrix &p, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(p.rows(), p.cols());
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = u(rng) < p.data()[i] ? 1.0 : 0.0;
  return m;
}

TmleInput random_input(int n, int q, std::mt19937_64 &rng) {
  TmleInput in;
  in.y1 = uniform(n, q, rng, 0.2, 0.8);
  in.y0 = uniform(n, q, rng, 0.2, 0.8);
  in.propensity = uniform(n, q, rng, 0.2, 0.8);
  in.treatment = bernoulli(in.propensity, rng);
  const Matrix qa = (in.treatment.array() * in.y1.array() +
                     (1.0 - in.treatment.array()) * in.y0.array())
                        .matrix();
  in.y_obs = bernoulli(qa, rng);
  in.known = bernoulli(Matrix::Constant(n, q, 0.9), rng);
  return in;
}

} // namespace

TEST_CASE("IPW examples") {
  Matrix y(2, 1), a(2, 1), p(2, 1);
  y << 1.0, 0.0;
  a << 1.0, 0.0;
  p << 0.5, 0.5;
  CHECK(ipw_adjust(y, a, p)(0) == 1.0);
  y.setConstant(0.3);
  CHECK(ipw_adjust(y, a, p)(0) == doctest::Approx(0.0).epsilon(1e-15));
  a.setOnes();
  CHECK_THROWS_AS(ipw_adjust(y, a, p), DegenerateTreatmentError);
  CHECK_THROWS_AS(ipw_adjust(y, Matrix::Ones(3, 1), p), StructuralError);
}

TEST_CASE("IPW with p = 0.5 is twice the arm-sum contrast") {
  std::mt19937_64 rng(1);
  const Matrix y = uniform(40, 3, rng, 0.0, 1.0);
  const Matrix a = bernoulli(Matrix::Constant(40, 3, 0.5), rng);
  const Vector psi = ipw_adjust(y, a, Matrix::Constant(40, 3, 0.5));
  for (int t = 0; t < 3; ++t) {
    double treated = 0.0, control = 0.0;
    for (int i = 0; i < 40; ++i)
      (a(i, t) > 0.5 ? treated : control) += y(i, t);
    CHECK(std::abs(psi(t) - 2.0 * (treated - control) / 40.0) < 1e-14);
  }
}

TEST_CASE("IPW clamps extreme propensities") {
  Matrix y(2, 1), a(2, 1), p(2, 1);
  y << 1.0, 1.0;
  a << 1.0, 0.0;
  p << 0.0, 0.0;
  CHECK(ipw_adjust(y, a, p)(0) == doctest::Approx(0.5 * (1.0 / kMinPropensity -
                                                          1.0 / (1.0 - kMinPropensity))));
}

TEST_CASE("zero fluctuation is the identity") {
  std::mt19937_64 rng(2);
  for (double q : {1e-9, 0.2, 0.5, 0.999999})
    for (double h : {1.0, 1.5, 100.0})
      CHECK(targeted_update(q, 0.0, h) == q);
  const TmleInput in = random_input(30, 4, rng);
  for (int t = 0; t < 4; ++t) {
    const auto [q1, q0] = targeted_outcomes(in, t, 0.0, 0.0);
    CHECK(q1 == in.y1.col(t));
    CHECK(q0 == in.y0.col(t));
  }
}

TEST_CASE("targeted update is the logit shift") {
  const auto expit = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  const auto logit = [](double p) { return std::log(p / (1.0 - p)); };
  for (double q : {0.1, 0.5, 0.9})
    for (double d : {-0.3, 0.2})
      for (double h : {1.2, 4.0, 200.0})
        CHECK(targeted_update(q, d, h) ==
              doctest::Approx(expit(logit(q) + d * h)).epsilon(1e-12));
}

TEST_CASE("targeting zeroes the weighted residual sum in each arm") {
  std::mt19937_64 rng(3);
  const TmleInput in = random_input(400, 3, rng);
  const AdjustedATE adj = tmle_adjust(in);
  for (int t = 0; t < 3; ++t) {
    const auto [q1, q0] = targeted_outcomes(in, t, adj.delta_1(t), adj.delta_0(t));
    double s1 = 0.0, s0 = 0.0;
    for (Eigen::Index i = 0; i < q1.size(); ++i) {
      if (in.known(i, t) < 0.5)
        continue;
      const double p = in.propensity(i, t);
      if (in.treatment(i, t) > 0.5)
        s1 += (in.y_obs(i, t) - q1(i)) / p;
      else
        s0 += (in.y_obs(i, t) - q0(i)) / (1.0 - p);
    }
    CHECK(std::abs(s1) < 1e-6);
    CHECK(std::abs(s0) < 1e-6);
    CHECK(adj.psi_tmle(t) == doctest::Approx((q1 - q0).mean()).epsilon(1e-12));
  }
}

TEST_CASE("a perfect initial fit needs no fluctuation") {
  std::mt19937_64 rng(4);
  TmleInput in = random_input(200, 2, rng);
  in.known.setOnes();
  in.y_obs = (in.treatment.array() * in.y1.array() +
              (1.0 - in.treatment.array()) * in.y0.array())
                 .matrix();
  // Weighted residuals vanish only when the weights are constant per arm.
  in.propensity.setConstant(0.4);
  const AdjustedATE adj = tmle_adjust(in);
  for (int t = 0; t < 2; ++t) {
    CHECK(std::abs(adj.delta_1(t)) < 1e-8);
    CHECK(std::abs(adj.delta_0(t)) < 1e-8);
    CHECK(std::abs(adj.psi_tmle(t) - adj.psi_initial(t)) < 1e-8);
  }
}

TEST_CASE("an arm with identical outcomes is treated as separated") {
  std::mt19937_64 rng(5);
  TmleInput in = random_input(50, 1, rng);
  for (Eigen::Index i = 0; i < 50; ++i)
    if (in.treatment(i, 0) > 0.5)
      in.y_obs(i, 0) = 1.0;
  const FluctuationFit f = fit_fluctuation(in, 0);
  CHECK(f.separated_1);
  CHECK(f.level_1 == 1.0);
  CHECK_FALSE(f.separated_0);
  const AdjustedATE adj = tmle_adjust(in);
  CHECK(adj.separated_1[0] == 1);
  CHECK(adj.delta_1(0) == 0.0);
}

TEST_CASE("Kaplan-Meier examples") {
  const std::vector<int> none_tau = {3, 3, 3}, none_ev = {0, 0, 0};
  CHECK(kaplan_meier(none_tau, none_ev, 3) == Vector::Ones(3));
  const std::vector<int> one_tau = {2}, one_ev = {1};
  CHECK(kaplan_meier(one_tau, one_ev, 3) == (Vector(3) << 1.0, 0.0, 0.0).finished());
}

TEST_CASE("Kaplan-Meier matches a brute-force risk-set computation") {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> t(1, 6);
  std::bernoulli_distribution e(0.5);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<int> tau, ev;
    for (int i = 0; i < 30; ++i) {
      tau.push_back(t(rng));
      ev.push_back(e(rng) ? 1 : 0);
    }
    const Vector km = kaplan_meier(tau, ev, 6);
    const Vector ref = oracle::kaplan_meier(tau, ev, 6);
    CHECK((km - ref).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("SNN drops exactly the propensity input") {
  simgen::ScenarioConfig c;
  c.n = 30;
  c.d = 3;
  c.history = 2;
  c.followup = 3;
  const simgen::Dataset d = simgen::generate(c, 9);
  tcsnet::TrainConfig t;
  t.members = 2;
  t.hidden = 4;
  t.epochs = 1;
  t.propensity.epochs = 1;
  t.propensity.hidden = 4;
  t.workers = 1;
  const auto snn = train_snn(d.samples, t);
  t.kind = tcsnet::ModelKind::Tcs;
  const auto tcs_model = tcsnet::train_ensemble(d.samples, t);
  CHECK(snn.kind() == tcsnet::ModelKind::Snn);
  CHECK(snn.layout.width() == tcs_model.layout.width() - 1);
  const auto ps = snn.members[0].net.parameters();
  const auto pt = tcs_model.members[0].net.parameters();
  REQUIRE(ps.size() == pt.size());
  for (std::size_t k = 0; k < ps.size(); ++k) {
    CHECK(ps[k]->value.cols() == pt[k]->value.cols());
    CHECK(ps[k]->value.rows() == pt[k]->value.rows() - (k == 0 ? 1 : 0));
  }
  CHECK_FALSE(snn.members[0].propensity.has_value());
  CHECK(tcs_model.members[0].propensity.has_value());
}

TEST_CASE("Binary regression of a shared label row converges to it") {
  simgen::ScenarioConfig c;
  c.n = 40;
  c.d = 3;
  c.history = 2;
  c.followup = 3;
  simgen::Dataset d = simgen::generate(c, 10);
  for (auto &s : d.samples) {
    s.event_time = c.followup + 1;
    s.censor_time = c.followup;
  }
  tcsnet::TrainConfig t;
  t.members = 2;
  t.hidden = 4;
  t.epochs = 200;
  t.lr = 1e-2;
  t.batch = 40;
  t.subsample = 1.0;
  t.workers = 1;
  const auto model = train_binary(d.samples, t);
  const auto p = tcsnet::predict_member(model, 0, d.samples);
  // Theta is 1 before tau = q and 0 at it.
  CHECK(p.survival_obs.leftCols(2).minCoeff() > 0.95);
  CHECK(p.survival_obs.col(2).maxCoeff() < 0.05);
}
