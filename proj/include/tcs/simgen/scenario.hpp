#pragma once

#include <json.hpp>

#include <cstdint>

namespace tcs::simgen {

struct ScenarioConfig {
  int n = 1500;           // subjects
  int d = 6;              // confounder dimension
  double variance = 0.5;  // covariate variance V
  double eta = 0.9;       // overlap parameter
  int history = 5;        // u
  int followup = 10;      // q
  double beta = 1.0;      // covariate hazard coefficient
  double treat_coef = 0.1;
  double lambda_scale = 30.0;
  // Exposure indicator is I(x1 + x2 + x3 > exposure_threshold).
  double exposure_threshold = 0.0;
  int replicates = 50;
  std::uint64_t seed = 20210607;

  int steps() const { return history + followup; }
  // Throws ConfigError naming the first violated bound.
  void validate() const;
};

void to_json(nlohmann::json &j, const ScenarioConfig &c);
// Missing keys keep their defaults.
void from_json(const nlohmann::json &j, ScenarioConfig &c);

} // namespace tcs::simgen
