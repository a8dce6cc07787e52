#pragma once

#include "tcs/sample.hpp"
#include "tcs/seeds.hpp"
#include "tcs/simgen/scenario.hpp"

#include <optional>
#include <span>
#include <vector>

namespace tcs::simgen {

using RowRef = Eigen::Ref<const Eigen::RowVectorXd>;

// Ground-truth counterfactual quantities, all N x q with column k-1 holding
// follow-up step k.
struct GroundTruth {
  Matrix ite;        // psi_i(k) = survival_1 - survival_0
  Matrix hazard_1;   // h(k) under the all-treated path
  Matrix hazard_0;   // h(k) under the all-control path
  Matrix survival_1; // P(no event by k | all treated)
  Matrix survival_0;

  // Mean of ite over the selected rows (all rows when empty).
  Vector ate(const std::vector<int> &rows = {}) const;
};

struct EventTimes {
  int event_time = 0;  // 1..q+1
  int censor_time = 0; // 1..q
};

struct Dataset {
  ScenarioConfig config;
  std::uint64_t seed = 0;
  std::vector<LongitudinalSample> samples;
  std::optional<GroundTruth> truth;
};

// X_d(s) ~ N(sqrt(s), V) on s = 1..u+q; one (u+q) x D panel per subject.
std::vector<Matrix> gen_covariates(const ScenarioConfig &cfg, Rng &rng);

bool exposure_indicator(const RowRef &x, double threshold = 0.0);
// eta * I + 0.5 * (1 - eta)
double treatment_probability(bool indicator, double eta);

std::vector<std::vector<int>> assign_treatment(const std::vector<Matrix> &panels,
                                               double eta, Rng &rng,
                                               double threshold = 0.0);

// (ln k / lambda) * (treat_coef * a + beta * sum_d x_d) at follow-up step k.
double hazard_at(const RowRef &x, int a, int k, const ScenarioConfig &cfg);

// Root-finding event rule with one uniform held fixed across steps:
// first k with exp(-h(k)) < u_e, else q+1. hazards[k-1] is h(k).
int event_time_from_uniform(std::span<const double> hazards, double u_e);
// First k with exp(-ln k / lambda) < u_c, else q.
int censor_time_from_uniform(int q, double lambda_scale, double u_c);

// Draws one event uniform then one censor uniform per subject.
std::vector<EventTimes> draw_times(const std::vector<Matrix> &panels,
                                   const std::vector<std::vector<int>> &treatment,
                                   const ScenarioConfig &cfg, Rng &rng);

// Counterfactual survival under the single-uniform rule is the running minimum
// of exp(-h) over steps 1..k.
GroundTruth true_ite(const std::vector<Matrix> &panels,
                     const ScenarioConfig &cfg);

// Full pipeline: covariates, treatment, times, truth, from one generator.
Dataset generate(const ScenarioConfig &cfg, std::uint64_t seed);

} // namespace tcs::simgen
