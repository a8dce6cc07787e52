#pragma once

#include "tcs/simgen/scenario.hpp"
#include "tcs/tcsnet/ensemble.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace tcs::harness {

inline const std::vector<std::string> kAllEstimators = {
    "tcs",        "snn_raw",    "snn_ipw",     "snn_tmle",
    "binary_raw", "binary_ipw", "binary_tmle", "km"};

// Grids over scenario parameters. Only non-empty grids are expanded; every
// other parameter keeps the base scenario value.
struct SweepSpec {
  std::vector<double> variance;
  std::vector<int> d;
  std::vector<double> eta;
  std::vector<int> n;

  bool empty() const {
    return variance.empty() && d.empty() && eta.empty() && n.empty();
  }
};

void to_json(nlohmann::json &j, const SweepSpec &s);
void from_json(const nlohmann::json &j, SweepSpec &s);

struct SweepCell {
  std::string name;
  simgen::ScenarioConfig config;
};

// Cartesian product in the order variance, d, eta, n (last varies fastest).
// Throws ConfigError when a cell is invalid.
std::vector<SweepCell> expand_sweep(const SweepSpec &sweep,
                                    const simgen::ScenarioConfig &base,
                                    const std::string &base_name);

// Full-scale grids used by the paper preset.
SweepSpec paper_sweep();

struct RunConfig {
  std::string preset = "desk";
  std::string scenario_name = "default";
  simgen::ScenarioConfig scenario;
  tcsnet::TrainConfig train;
  // Propensity model used by the IPW / TMLE adjustments.
  tcsnet::PropensityConfig adjust_propensity;
  std::vector<std::string> estimators = kAllEstimators;
  SweepSpec sweep;

  // Throws ConfigError.
  void validate() const;
};

void to_json(nlohmann::json &j, const RunConfig &c);
// Keys missing from j keep the values already in c, so a file can override a
// preset partially.
void merge_json(const nlohmann::json &j, RunConfig &c);

// "desk": N = 500, 5 replicates, 5 members, short training.
// "paper": N = 1500, 50 replicates, 20 members.
RunConfig preset(const std::string &name);

// Named scenarios: "default" plus the single-parameter variants
// "eta=<v>", "V=<v>", "D=<v>", "N=<v>" applied to the preset's scenario.
simgen::ScenarioConfig named_scenario(const std::string &name,
                                      simgen::ScenarioConfig base);

std::vector<std::string> parse_estimators(const std::string &list);

// Version string recorded in result provenance.
const char *version();

} // namespace tcs::harness
