#include "tcs/error.hpp"
#include "tcs/metrics/metrics.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace tcs;
using namespace tcs::metrics;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64 &rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = z(rng);
  return m;
}

struct SurvivalData {
  std::vector<double> risk;
  std::vector<int> times;
  std::vector<int> events;
};

SurvivalData random_survival(int n, std::mt19937_64 &rng, int max_time = 6) {
  std::uniform_int_distribution<int> t(1, max_time);
  std::bernoulli_distribution e(0.6);
  std::uniform_int_distribution<int> r(0, 9); // coarse, so ties occur
  SurvivalData d;
  for (int i = 0; i < n; ++i) {
    d.risk.push_back(r(rng) / 10.0);
    d.times.push_back(t(rng));
    d.events.push_back(e(rng) ? 1 : 0);
  }
  return d;
}

} // namespace

TEST_CASE("rmse examples") {
  std::mt19937_64 rng(1);
  const Matrix truth = random_matrix(10, 4, rng);
  CHECK(rmse(truth, truth).cwiseAbs().maxCoeff() == 0.0);
  const Vector r = rmse((truth.array() + 0.2).matrix(), truth);
  for (Eigen::Index t = 0; t < r.size(); ++t)
    CHECK(r(t) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("rmse and mse match a brute-force loop") {
  std::mt19937_64 rng(2);
  const Matrix est = random_matrix(50, 5, rng), truth = random_matrix(50, 5, rng);
  const Vector m = mse(est, truth), r = rmse(est, truth);
  for (int t = 0; t < 5; ++t) {
    double acc = 0.0;
    for (int i = 0; i < 50; ++i)
      acc += (est(i, t) - truth(i, t)) * (est(i, t) - truth(i, t));
    CHECK(std::abs(m(t) - acc / 50.0) < 1e-12);
    CHECK(std::abs(r(t) - std::sqrt(acc / 50.0)) < 1e-12);
  }
  const std::vector<int> group = {3, 7, 11};
  const Vector g = mse(est, truth, group);
  for (int t = 0; t < 5; ++t) {
    double acc = 0.0;
    for (int i : group)
      acc += std::pow(est(i, t) - truth(i, t), 2);
    CHECK(std::abs(g(t) - acc / 3.0) < 1e-12);
  }
  CHECK_THROWS_AS(mse(est, truth, std::vector<int>{}), SelectionError);
  CHECK_THROWS_AS(mse(est, truth, std::vector<int>{50}), SelectionError);
}

TEST_CASE("bias examples") {
  std::mt19937_64 rng(3);
  Matrix truth = random_matrix(20, 3, rng);
  const BiasResult b = bias(1.1 * truth, truth);
  for (int t = 0; t < 3; ++t)
    CHECK(b.per_time(t) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(bias(truth, truth).mean() == 0.0);
}

TEST_CASE("bias with mixed signs matches a brute-force loop and skips zeros") {
  std::mt19937_64 rng(4);
  Matrix truth = random_matrix(20, 3, rng);
  truth(0, 0) = 0.0;
  truth(5, 2) = 1e-9;
  const Matrix est = random_matrix(20, 3, rng);
  const BiasResult b = bias(est, truth);
  for (int t = 0; t < 3; ++t) {
    double acc = 0.0;
    int used = 0;
    for (int i = 0; i < 20; ++i)
      if (std::abs(truth(i, t)) > kBiasFloor) {
        acc += std::abs((est(i, t) - truth(i, t)) / truth(i, t));
        ++used;
      }
    CHECK(std::abs(b.per_time(t) - acc / used) < 1e-12);
  }
  CHECK(b.skipped == std::vector<int>{1, 0, 1});

  Matrix zero = Matrix::Zero(4, 2);
  CHECK_THROWS_AS(bias(est.topRows(4).leftCols(2), zero), UndefinedMetricError);
  zero(1, 1) = 0.5;
  const BiasResult partial = bias(Matrix::Ones(4, 2), zero);
  CHECK(std::isnan(partial.per_time(0)));
  CHECK(partial.per_time(1) == doctest::Approx(1.0));
}

TEST_CASE("bias and rmse are scale consistent") {
  std::mt19937_64 rng(5);
  const Matrix est = random_matrix(30, 4, rng), truth = random_matrix(30, 4, rng);
  CHECK(std::abs(bias(3.0 * est, 3.0 * truth).mean() - bias(est, truth).mean()) < 1e-12);
  CHECK((rmse(3.0 * est, 3.0 * truth) - 3.0 * rmse(est, truth)).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("coverage examples") {
  std::mt19937_64 rng(6);
  const Matrix truth = random_matrix(10, 3, rng);
  const Vector all = coverage((truth.array() - 1).matrix(), (truth.array() + 1).matrix(), truth);
  CHECK(all.minCoeff() == 1.0);
  const Matrix est = (truth.array() + 0.5).matrix();
  CHECK(coverage(est, est, truth).maxCoeff() == 0.0);
  CHECK(coverage(truth, truth, truth).minCoeff() == 1.0); // inclusive
  CHECK_THROWS_AS(coverage(est, truth, truth), StructuralError);
}

TEST_CASE("perfect ordering gives concordance and AUROC of 1") {
  const std::vector<double> risk = {0.9, 0.7, 0.5, 0.1};
  const std::vector<int> times = {1, 2, 3, 4}, events = {1, 1, 1, 0};
  CHECK(concordance(risk, times, events) == 1.0);
  const std::vector<int> labels = {1, 1, 0, 0};
  CHECK(auroc(risk, labels) == 1.0);
}

TEST_CASE("concordance and AUROC match brute-force pair counts") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 30; ++rep) {
    const SurvivalData d = random_survival(40, rng);
    CHECK(concordance(d.risk, d.times, d.events) ==
          oracle::concordance(d.risk, d.times, d.events));
    CHECK(auroc(d.risk, d.events) == oracle::auroc(d.risk, d.events));
  }
}

TEST_CASE("random scores give about one half") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 4000;
  SurvivalData d = random_survival(n, rng, 30);
  for (double &r : d.risk)
    r = u(rng);
  const double se = 0.5 / std::sqrt(n * 0.3);
  CHECK(std::abs(concordance(d.risk, d.times, d.events) - 0.5) < 3.0 * se);
  CHECK(std::abs(auroc(d.risk, d.events) - 0.5) < 3.0 * se);
}

TEST_CASE("rank metrics are invariant to ordering and monotone transforms") {
  std::mt19937_64 rng(9);
  SurvivalData d = random_survival(45, rng);
  const double c = concordance(d.risk, d.times, d.events);
  const double a = auroc(d.risk, d.events);
  std::vector<double> mapped;
  for (double r : d.risk)
    mapped.push_back(std::exp(3.0 * r) - 2.0);
  CHECK(concordance(mapped, d.times, d.events) == c);
  CHECK(auroc(mapped, d.events) == a);

  std::vector<std::size_t> perm(d.risk.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  SurvivalData p;
  for (std::size_t i : perm) {
    p.risk.push_back(d.risk[i]);
    p.times.push_back(d.times[i]);
    p.events.push_back(d.events[i]);
  }
  CHECK(concordance(p.risk, p.times, p.events) == c);
  CHECK(auroc(p.risk, p.events) == a);
}

TEST_CASE("undefined rank metrics throw") {
  const std::vector<double> r = {0.1, 0.2};
  CHECK_THROWS_AS(concordance(r, std::vector<int>{1, 2}, std::vector<int>{0, 0}),
                  UndefinedMetricError);
  CHECK_THROWS_AS(auroc(r, std::vector<int>{1, 1}), UndefinedMetricError);
  CHECK_THROWS_AS(auroc(r, std::vector<int>{1}), StructuralError);
}

TEST_CASE("nanmean ignores non-finite entries") {
  Vector v(4);
  v << 1.0, std::nan(""), 3.0, std::nan("");
  CHECK(nanmean(v) == 2.0);
  CHECK(std::isnan(nanmean(Vector::Constant(2, std::nan("")))));
}
