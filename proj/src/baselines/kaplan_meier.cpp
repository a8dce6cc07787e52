#include "tcs/baselines/kaplan_meier.hpp"

#include "tcs/error.hpp"

namespace tcs::baselines {

Vector kaplan_meier(std::span<const int> tau, std::span<const int> event, int q) {
  if (tau.empty())
    throw DataError("Kaplan-Meier needs at least one subject");
  if (tau.size() != event.size())
    throw StructuralError("Kaplan-Meier: tau and event lengths differ");
  std::vector<int> at_risk(static_cast<std::size_t>(q) + 2, 0);
  std::vector<int> deaths(static_cast<std::size_t>(q) + 2, 0);
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (tau[i] < 1)
      throw DataError("Kaplan-Meier: tau must be >= 1");
    const int last = std::min(tau[i], q);
    for (int k = 1; k <= last; ++k)
      ++at_risk[static_cast<std::size_t>(k)];
    if (event[i] && tau[i] <= q)
      ++deaths[static_cast<std::size_t>(tau[i])];
  }
  Vector s(q);
  double acc = 1.0;
  for (int k = 1; k <= q; ++k) {
    const int n = at_risk[static_cast<std::size_t>(k)];
    if (n > 0)
      acc *= 1.0 - static_cast<double>(deaths[static_cast<std::size_t>(k)]) / n;
    s(k - 1) = acc;
  }
  return s;
}

Vector kaplan_meier(const std::vector<LongitudinalSample> &samples) {
  if (samples.empty())
    throw DataError("Kaplan-Meier needs at least one subject");
  std::vector<int> tau, event;
  for (const LongitudinalSample &s : samples) {
    tau.push_back(s.tau());
    event.push_back(s.event() ? 1 : 0);
  }
  return kaplan_meier(tau, event, samples.front().followup);
}

} // namespace tcs::baselines
