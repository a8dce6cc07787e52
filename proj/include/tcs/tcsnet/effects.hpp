#pragma once

#include "tcs/tcsnet/ensemble.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace tcs::tcsnet {

// S(t) = prod_{j <= t} (1 - theta(j)).
Vector survival_curve(const Vector &theta);
// Row-wise survival_curve.
Matrix survival_curves(const Matrix &theta);

// One member's predictions, N x q each. For Binary models the network output
// is the survival estimate itself and the hazard fields hold 1 - survival.
struct CounterfactualPrediction {
  Matrix hazard_1, hazard_0, hazard_obs;
  Matrix survival_1, survival_0, survival_obs;
};

// hazard_a = theta_hat under counterfactual(Lambda, a); *_obs uses the
// observed treatments.
CounterfactualPrediction predict_member(const EnsembleModel &model, int member,
                                        const std::vector<LongitudinalSample> &samples);
std::vector<CounterfactualPrediction>
predict_members(const EnsembleModel &model,
                const std::vector<LongitudinalSample> &samples);

struct EffectEstimate {
  std::vector<std::string> ids;
  std::vector<int> rows; // indices into the evaluated samples
  // n x q, member means; bands are the 2.5 / 97.5 member percentiles.
  Matrix ite, ite_lo, ite_hi;
  Matrix survival_1, survival_0, survival_obs;
  Matrix hazard_1, hazard_0;
  // Length q.
  Vector cate, cate_lo, cate_hi;
  Vector hr_star;
};

using SubgroupFilter = std::function<bool(const LongitudinalSample &)>;

// Linear-interpolation percentile, pct in [0, 100].
double percentile(std::vector<double> values, double pct);

// Aggregates member predictions over the selected rows. Throws SelectionError
// when rows is empty.
EffectEstimate aggregate_effects(const std::vector<CounterfactualPrediction> &members,
                                 const std::vector<LongitudinalSample> &samples,
                                 std::span<const int> rows);

// All subjects passing the filter (everyone when it is empty).
EffectEstimate estimate_effects(const EnsembleModel &model,
                                const std::vector<LongitudinalSample> &samples,
                                const SubgroupFilter &filter = {});

// Hazards below this floor are raised to it in the denominator of HR*.
inline constexpr double kHazardRatioFloor = 1e-7;

} // namespace tcs::tcsnet
