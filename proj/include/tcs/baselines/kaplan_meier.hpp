#pragma once

#include "tcs/sample.hpp"

#include <span>
#include <vector>

namespace tcs::baselines {

// Product-limit estimate over follow-up steps 1..q. The risk set at step k is
// every subject with tau >= k; censored subjects leave it after their step.
Vector kaplan_meier(std::span<const int> tau, std::span<const int> event, int q);
Vector kaplan_meier(const std::vector<LongitudinalSample> &samples);

} // namespace tcs::baselines
