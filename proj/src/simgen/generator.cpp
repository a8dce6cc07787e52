#include "tcs/simgen/generator.hpp"

#include "tcs/error.hpp"

#include <algorithm>
#include <cmath>

namespace tcs::simgen {

Vector GroundTruth::ate(const std::vector<int> &rows) const {
  if (rows.empty())
    return ite.colwise().mean().transpose();
  Vector acc = Vector::Zero(ite.cols());
  for (int r : rows)
    acc += ite.row(r).transpose();
  return acc / static_cast<double>(rows.size());
}

std::vector<Matrix> gen_covariates(const ScenarioConfig &cfg, Rng &rng) {
  cfg.validate();
  const double sd = std::sqrt(cfg.variance);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<Matrix> panels;
  panels.reserve(static_cast<std::size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) {
    Matrix x(cfg.steps(), cfg.d);
    for (int s = 1; s <= cfg.steps(); ++s)
      for (int d = 0; d < cfg.d; ++d)
        x(s - 1, d) = std::sqrt(static_cast<double>(s)) + sd * z(rng);
    panels.push_back(std::move(x));
  }
  return panels;
}

bool exposure_indicator(const RowRef &x, double threshold) {
  if (x.size() < 3)
    throw ConfigError("exposure indicator needs at least 3 confounders");
  return x(0) + x(1) + x(2) > threshold;
}

double treatment_probability(bool indicator, double eta) {
  return eta * (indicator ? 1.0 : 0.0) + 0.5 * (1.0 - eta);
}

std::vector<std::vector<int>> assign_treatment(const std::vector<Matrix> &panels,
                                               double eta, Rng &rng,
                                               double threshold) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<int>> out;
  out.reserve(panels.size());
  for (const Matrix &x : panels) {
    std::vector<int> a(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index s = 0; s < x.rows(); ++s) {
      const double p =
          treatment_probability(exposure_indicator(x.row(s), threshold), eta);
      a[static_cast<std::size_t>(s)] = unif(rng) < p ? 1 : 0;
    }
    out.push_back(std::move(a));
  }
  return out;
}

double hazard_at(const RowRef &x, int a, int k, const ScenarioConfig &cfg) {
  if (k < 1)
    throw ConfigError("hazard time index must be >= 1");
  return std::log(static_cast<double>(k)) / cfg.lambda_scale *
         (cfg.treat_coef * a + cfg.beta * x.sum());
}

int event_time_from_uniform(std::span<const double> hazards, double u_e) {
  const int q = static_cast<int>(hazards.size());
  for (int k = 1; k <= q; ++k)
    if (std::exp(-hazards[static_cast<std::size_t>(k - 1)]) < u_e)
      return k;
  return q + 1;
}

int censor_time_from_uniform(int q, double lambda_scale, double u_c) {
  for (int k = 1; k <= q; ++k)
    if (std::exp(-std::log(static_cast<double>(k)) / lambda_scale) < u_c)
      return k;
  return q;
}

std::vector<EventTimes> draw_times(const std::vector<Matrix> &panels,
                                   const std::vector<std::vector<int>> &treatment,
                                   const ScenarioConfig &cfg, Rng &rng) {
  if (panels.size() != treatment.size())
    throw StructuralError("draw_times: panel and treatment counts differ");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> h(static_cast<std::size_t>(cfg.followup));
  std::vector<EventTimes> out;
  out.reserve(panels.size());
  for (std::size_t i = 0; i < panels.size(); ++i) {
    for (int k = 1; k <= cfg.followup; ++k) {
      const int s = cfg.history + k;
      h[static_cast<std::size_t>(k - 1)] =
          hazard_at(panels[i].row(s - 1), treatment[i][static_cast<std::size_t>(s - 1)],
                    k, cfg);
    }
    const double u_e = unif(rng);
    const double u_c = unif(rng);
    out.push_back({event_time_from_uniform(h, u_e),
                   censor_time_from_uniform(cfg.followup, cfg.lambda_scale, u_c)});
  }
  return out;
}

GroundTruth true_ite(const std::vector<Matrix> &panels,
                     const ScenarioConfig &cfg) {
  const auto n = static_cast<Eigen::Index>(panels.size());
  const int q = cfg.followup;
  GroundTruth gt;
  gt.hazard_1.resize(n, q);
  gt.hazard_0.resize(n, q);
  gt.survival_1.resize(n, q);
  gt.survival_0.resize(n, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    double min1 = 1.0, min0 = 1.0;
    for (int k = 1; k <= q; ++k) {
      const auto row = panels[static_cast<std::size_t>(i)].row(cfg.history + k - 1);
      const double h1 = hazard_at(row, 1, k, cfg);
      const double h0 = hazard_at(row, 0, k, cfg);
      min1 = std::min(min1, std::exp(-h1));
      min0 = std::min(min0, std::exp(-h0));
      gt.hazard_1(i, k - 1) = h1;
      gt.hazard_0(i, k - 1) = h0;
      gt.survival_1(i, k - 1) = min1;
      gt.survival_0(i, k - 1) = min0;
    }
  }
  gt.ite = gt.survival_1 - gt.survival_0;
  return gt;
}

Dataset generate(const ScenarioConfig &cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  std::vector<Matrix> panels = gen_covariates(cfg, rng);
  auto treatment = assign_treatment(panels, cfg.eta, rng, cfg.exposure_threshold);
  auto times = draw_times(panels, treatment, cfg, rng);

  Dataset ds;
  ds.config = cfg;
  ds.seed = seed;
  ds.truth = true_ite(panels, cfg);
  ds.samples.reserve(panels.size());
  for (std::size_t i = 0; i < panels.size(); ++i) {
    LongitudinalSample s;
    s.id = std::to_string(i + 1);
    s.history = cfg.history;
    s.followup = cfg.followup;
    s.x = std::move(panels[i]);
    s.mask = MaskMatrix::Ones(s.x.rows(), s.x.cols());
    s.treatment = std::move(treatment[i]);
    s.event_time = times[i].event_time;
    s.censor_time = times[i].censor_time;
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

} // namespace tcs::simgen
