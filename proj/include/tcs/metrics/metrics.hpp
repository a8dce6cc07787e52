#pragma once

#include "tcs/sample.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tcs::metrics {

// Estimates and truths are N x q matrices (subjects x follow-up steps). The
// group overloads evaluate the listed rows only and throw SelectionError on an
// empty group.

// Root of the group-mean squared error, per step.
Vector rmse(const Matrix &est, const Matrix &truth);
Vector rmse(const Matrix &est, const Matrix &truth, std::span<const int> group);
Vector mse(const Matrix &est, const Matrix &truth);
Vector mse(const Matrix &est, const Matrix &truth, std::span<const int> group);

struct BiasResult {
  Vector per_time;          // NaN at steps where every term was skipped
  std::vector<int> skipped; // per step, terms with |truth| <= floor
  double mean() const;      // over steps with a value
};

inline constexpr double kBiasFloor = 1e-6;

// Mean of |(est - truth) / truth|. Throws UndefinedMetricError when every term
// at every step is skipped.
BiasResult bias(const Matrix &est, const Matrix &truth,
                double floor = kBiasFloor);
BiasResult bias(const Matrix &est, const Matrix &truth,
                std::span<const int> group, double floor = kBiasFloor);

// Fraction of subjects with lo <= truth <= hi, per step. StructuralError when
// lo > hi anywhere.
Vector coverage(const Matrix &lo, const Matrix &hi, const Matrix &truth);
Vector coverage(const Matrix &lo, const Matrix &hi, const Matrix &truth,
                std::span<const int> group);

// Harrell's C. Pair (i, j) is comparable iff times[i] < times[j] and i had an
// event; concordant when risk[i] > risk[j], ties count 1/2. Throws
// UndefinedMetricError without comparable pairs.
double concordance(std::span<const double> risk, std::span<const int> times,
                   std::span<const int> events);

// Area under the ROC curve from the rank-sum statistic, ties averaged.
double auroc(std::span<const double> scores, std::span<const int> labels);

// Mean over finite entries; NaN when there are none.
double nanmean(const Vector &v);

struct MetricReport {
  std::string scenario;
  int replicate = 0;
  std::uint64_t seed = 0;
  std::string estimator;
  std::string subgroup = "all";
  // Per follow-up step; NaN where a metric does not apply to the estimator.
  Vector rmse;
  Vector mse;
  Vector bias_ate;
  Vector bias_ite;
  Vector coverage;
  Vector concordance;
  Vector auroc;
  std::vector<int> bias_skipped;
  double auroc_pooled = 0.0;

  // All per-step vectors filled with NaN, skip counts zeroed.
  static MetricReport empty(int q);
  int steps() const { return static_cast<int>(rmse.size()); }
};

} // namespace tcs::metrics
