#pragma once

#include "tcs/harness/config.hpp"
#include "tcs/metrics/metrics.hpp"
#include "tcs/simgen/generator.hpp"
#include "tcs/tcsnet/effects.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tcs::harness {

// One line of effects.csv. Subject rows carry the subject id; the row with id
// "ATE" carries the average effect, its band and HR*.
struct EffectRow {
  std::string scenario;
  int replicate = 0;
  std::string estimator;
  std::string id;
  int time = 0; // follow-up step
  double ite = 0, lo = 0, hi = 0, s1 = 0, s0 = 0, true_ite = 0, hr_star = 0;
};

inline const std::string kAteRowId = "ATE";

struct Failure {
  std::string scenario;
  int replicate = 0;
  std::string estimator;
  std::string category;
  std::string message;
};

struct ReplicateSeeds {
  std::uint64_t train = 0;
  std::uint64_t test = 0;
  std::uint64_t model = 0;  // base of the ensemble seeds
  std::uint64_t adjust = 0; // propensity model of the adjustments
};

ReplicateSeeds replicate_seeds(std::uint64_t base, int replicate);

// Seed ledger entry: base seed, replicate and every model and member seed.
struct SeedRecord {
  std::string scenario;
  int replicate = 0;
  ReplicateSeeds seeds;
  std::map<std::string, std::vector<std::uint64_t>> members;
};

struct RunResult {
  std::vector<metrics::MetricReport> reports;
  std::vector<EffectRow> effects;
  std::vector<Failure> failures;
  std::vector<SeedRecord> ledger;

  void append(RunResult &&other);
};

// Status of each subject at every follow-up step (N x q): known is 1 unless
// the subject was censored before the step; event_by is 1 once the event has
// happened.
struct StepStatus {
  Matrix known;
  Matrix event_by;
};

StepStatus step_status(const std::vector<LongitudinalSample> &samples);

// Follow-up treatment A(u + k) in column k - 1.
Matrix followup_treatment(const std::vector<LongitudinalSample> &samples);

// Discrimination of a survival prediction (N x q): per-step concordance of
// 1 - S(t) against (tau, event), per-step AUROC of 1 - S(t) against event_by
// among known subjects, and the pooled AUROC. Undefined steps are NaN.
void fill_discrimination(metrics::MetricReport &report, const Matrix &survival,
                         const std::vector<LongitudinalSample> &samples);

// ITE, ATE, coverage and discrimination metrics of an ensemble estimate.
metrics::MetricReport evaluate_ite(const tcsnet::EffectEstimate &estimate,
                                   const simgen::GroundTruth &truth,
                                   const std::vector<LongitudinalSample> &samples);

// ATE-only estimators: bias_ate per step, and rmse / mse of the ATE itself.
metrics::MetricReport evaluate_ate(const Vector &ate, const Vector &true_ate);

// Unadjusted contrast of Kaplan-Meier curves between subjects treated and
// untreated at the first follow-up step. Returns (S_treated, S_control).
std::pair<Vector, Vector> km_by_arm(const std::vector<LongitudinalSample> &samples);

// Generates the train/test pair, fits the requested estimators, evaluates on
// test. Estimator failures are recorded and do not stop the run.
RunResult run_replicate(const RunConfig &config, const std::string &scenario_name,
                        const simgen::ScenarioConfig &scenario, int replicate);

// Every replicate of one scenario, in a worker pool; output ordered by
// replicate.
RunResult run_scenario(const RunConfig &config, const std::string &scenario_name,
                       const simgen::ScenarioConfig &scenario);

// The sweep (or the single configured scenario when the sweep is empty).
RunResult run_bench(const RunConfig &config);

} // namespace tcs::harness
