#include "tcs/error.hpp"
#include "tcs/simgen/dataset_io.hpp"
#include "tcs/simgen/generator.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace tcs;
using namespace tcs::simgen;

namespace {

ScenarioConfig small(int n) {
  ScenarioConfig c;
  c.n = n;
  return c;
}

} // namespace

TEST_CASE("invalid scenarios name the violated bound") {
  ScenarioConfig c;
  c.n = 1;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("N must be"), ConfigError);
  c = {};
  c.d = 2;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("D must be"), ConfigError);
  c = {};
  c.eta = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.variance = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.history = 0;
  CHECK_THROWS_AS(generate(c, 1), ConfigError);
}

TEST_CASE("covariate means pass a 3-sigma test against sqrt(s)") {
  ScenarioConfig c = small(4000);
  Rng rng(11);
  const auto panels = gen_covariates(c, rng);
  const double se = std::sqrt(c.variance / c.n);
  for (int s = 1; s <= c.steps(); ++s)
    for (int d = 0; d < c.d; ++d) {
      double mean = 0.0;
      for (const Matrix &x : panels)
        mean += x(s - 1, d);
      mean /= c.n;
      CHECK(std::abs(mean - std::sqrt(static_cast<double>(s))) < 3.0 * se + 1e-12);
    }
}

TEST_CASE("vanishing variance draws the mean exactly") {
  ScenarioConfig c = small(3);
  c.variance = 1e-300;
  Rng rng(1);
  for (const Matrix &x : gen_covariates(c, rng))
    for (int s = 1; s <= c.steps(); ++s)
      CHECK(x(s - 1, 0) == doctest::Approx(std::sqrt(static_cast<double>(s))).epsilon(1e-12));
}

TEST_CASE("same seed gives bit-identical datasets") {
  const Dataset a = generate(small(50), 99), b = generate(small(50), 99);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].x == b.samples[i].x);
    CHECK(a.samples[i].treatment == b.samples[i].treatment);
    CHECK(a.samples[i].event_time == b.samples[i].event_time);
    CHECK(a.samples[i].censor_time == b.samples[i].censor_time);
  }
  CHECK(a.truth->ite == b.truth->ite);
  const Dataset c = generate(small(50), 100);
  CHECK(c.samples[0].x != a.samples[0].x);
}

TEST_CASE("treatment probability examples") {
  CHECK(treatment_probability(true, 0.0) == 0.5);
  CHECK(treatment_probability(false, 0.0) == 0.5);
  CHECK(treatment_probability(true, 1.0) == 1.0);
  CHECK(treatment_probability(false, 1.0) == 0.0);
  CHECK(treatment_probability(true, 0.5) == 0.75);
  CHECK(treatment_probability(false, 0.5) == 0.25);
}

TEST_CASE("exposure indicator reads the first three confounders") {
  Eigen::RowVectorXd x(4);
  x << 1.0, -2.0, 0.5, 100.0;
  CHECK_FALSE(exposure_indicator(x));
  x(2) = 1.5;
  CHECK(exposure_indicator(x));
  CHECK_FALSE(exposure_indicator(x, 1.0));
  CHECK_THROWS_AS(exposure_indicator(Eigen::RowVectorXd::Ones(2)), ConfigError);
}

TEST_CASE("eta = 0 assigns treatment independently of covariates") {
  ScenarioConfig c = small(4000);
  c.eta = 0.0;
  Rng rng(5);
  const auto panels = gen_covariates(c, rng);
  const auto a = assign_treatment(panels, 0.0, rng);
  double treated = 0.0, total = 0.0;
  for (const auto &path : a)
    for (int v : path) {
      treated += v;
      total += 1.0;
    }
  const double p = treated / total;
  CHECK(std::abs(p - 0.5) < 3.0 * std::sqrt(0.25 / total));
}

TEST_CASE("propensity spread is non-decreasing in eta") {
  ScenarioConfig c = small(10000);
  Rng rng(8);
  const auto panels = gen_covariates(c, rng);
  double last = -1.0;
  for (double eta : {0.0, 0.5, 1.0}) {
    double lo = 1.0, hi = 0.0;
    for (const Matrix &x : panels)
      for (Eigen::Index s = 0; s < x.rows(); ++s) {
        const double p = treatment_probability(exposure_indicator(x.row(s)), eta);
        lo = std::min(lo, p);
        hi = std::max(hi, p);
      }
    CHECK(hi - lo >= last);
    last = hi - lo;
  }
  CHECK(last == 1.0);
}

TEST_CASE("hazard examples") {
  ScenarioConfig c;
  Eigen::RowVectorXd x = Eigen::RowVectorXd::Constant(6, 5.0);
  CHECK(hazard_at(x, 1, 1, c) == 0.0);
  CHECK(hazard_at(x, 0, 1, c) == 0.0);
  const double diff = hazard_at(x, 1, 7, c) - hazard_at(x, 0, 7, c);
  CHECK(diff == doctest::Approx(0.1 * std::log(7.0) / 30.0).epsilon(1e-12));
  // ln 2 * (30 / ln 2) / 30 = 1
  Eigen::RowVectorXd y = Eigen::RowVectorXd::Constant(6, 5.0 / std::log(2.0));
  CHECK(hazard_at(y, 0, 2, c) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(hazard_at(x, 0, 0, c), ConfigError);
}

TEST_CASE("root-finding examples") {
  const std::vector<double> h = {0.0, 0.5, 1.0, 2.0};
  CHECK(event_time_from_uniform(h, 0.0) == 5);
  CHECK(event_time_from_uniform(h, 1.0) == 2);
  CHECK(event_time_from_uniform(h, 0.5) == 3); // exp(-1) < 0.5
  CHECK(censor_time_from_uniform(10, 30.0, 1.0) == 2);
  CHECK(censor_time_from_uniform(10, 30.0, 0.0) == 10);
}

TEST_CASE("generated times respect their ranges and Y = I(tau_s <= tau_c)") {
  const Dataset d = generate(small(2000), 3);
  for (const LongitudinalSample &s : d.samples) {
    CHECK(s.event_time >= 1);
    CHECK(s.event_time <= s.followup + 1);
    CHECK(s.censor_time >= 1);
    CHECK(s.censor_time <= s.followup);
    CHECK(s.event() == (s.event_time <= s.censor_time));
    CHECK(s.mask.minCoeff() == 1);
  }
}

TEST_CASE("event and censor rates match an independent re-simulation") {
  const ScenarioConfig c = small(30000);
  const Dataset d = generate(c, 17);
  double event = 0.0, censored = 0.0;
  for (const LongitudinalSample &s : d.samples) {
    event += (s.event() && s.event_time <= s.followup) ? 1.0 : 0.0;
    censored += s.censor_time < s.event_time ? 1.0 : 0.0;
  }
  event /= c.n;
  censored /= c.n;
  const oracle::Rates r = oracle::resimulate(c, 30000, 2024);
  CHECK(std::abs(event - r.event) < 0.02);
  CHECK(std::abs(censored - r.censored) < 0.02);
}

TEST_CASE("true ITE matches its Monte Carlo oracle") {
  const ScenarioConfig c = small(5);
  Rng rng(21);
  const auto panels = gen_covariates(c, rng);
  const GroundTruth gt = true_ite(panels, c);
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const Vector mc = oracle::mc_ite(panels[i], c, 200000, 7u + static_cast<unsigned>(i));
    for (int k = 0; k < c.followup; ++k)
      CHECK(std::abs(gt.ite(static_cast<Eigen::Index>(i), k) - mc(k)) < 1e-3);
  }
}

TEST_CASE("true ITE structure") {
  ScenarioConfig c = small(300);
  const Dataset d = generate(c, 4);
  const GroundTruth &gt = *d.truth;
  CHECK(gt.ite.col(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(gt.ite.maxCoeff() <= 0.0);
  CHECK(gt.ite.minCoeff() >= -1.0);
  for (Eigen::Index i = 0; i < gt.ite.rows(); ++i)
    for (Eigen::Index k = 1; k < gt.ite.cols(); ++k) {
      CHECK(gt.survival_1(i, k) <= gt.survival_1(i, k - 1));
      CHECK(gt.survival_0(i, k) <= gt.survival_0(i, k - 1));
    }

  c.treat_coef = 0.0;
  CHECK(generate(c, 4).truth->ite.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dataset files round-trip") {
  const Dataset d = generate(small(20), 12);
  const auto dir = std::filesystem::temp_directory_path() / "tcs_simgen_rt";
  std::filesystem::create_directories(dir);
  write_dataset(dir / "d.csv", d.samples, d.seed, d.config);
  const DatasetFile back = read_dataset(dir / "d.csv");
  CHECK(back.seed == d.seed);
  REQUIRE(back.config.has_value());
  CHECK(back.config->n == 20);
  REQUIRE(back.samples.size() == d.samples.size());
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    CHECK(back.samples[i].x == d.samples[i].x);
    CHECK(back.samples[i].mask == d.samples[i].mask);
    CHECK(back.samples[i].treatment == d.samples[i].treatment);
    CHECK(back.samples[i].event_time == d.samples[i].event_time);
    CHECK(back.samples[i].censor_time == d.samples[i].censor_time);
  }
  std::filesystem::remove(dir / "d.json");
  CHECK_THROWS_AS(read_dataset(dir / "d.csv"), IoError);
  std::filesystem::remove_all(dir);
}
