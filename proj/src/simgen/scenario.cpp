#include "tcs/simgen/scenario.hpp"

#include "tcs/error.hpp"

#include <cmath>

namespace tcs::simgen {

void ScenarioConfig::validate() const {
  if (n < 2)
    throw ConfigError("N must be >= 2 (got " + std::to_string(n) + ")");
  if (d < 3)
    throw ConfigError("D must be >= 3 because exposure reads the first three "
                      "confounders (got " + std::to_string(d) + ")");
  if (history < 1)
    throw ConfigError("u must be >= 1 (got " + std::to_string(history) + ")");
  if (followup < 1)
    throw ConfigError("q must be >= 1 (got " + std::to_string(followup) + ")");
  if (!(eta >= 0.0 && eta <= 1.0))
    throw ConfigError("eta must lie in [0, 1] (got " + std::to_string(eta) +
                      ")");
  if (!(variance > 0.0))
    throw ConfigError("V must be > 0 (got " + std::to_string(variance) + ")");
  if (!(lambda_scale > 0.0))
    throw ConfigError("lambda must be > 0 (got " +
                      std::to_string(lambda_scale) + ")");
  if (!std::isfinite(beta) || !std::isfinite(treat_coef) ||
      !std::isfinite(exposure_threshold))
    throw ConfigError("beta, treat_coef and exposure_threshold must be finite");
  if (replicates < 1)
    throw ConfigError("replicates must be >= 1");
}

void to_json(nlohmann::json &j, const ScenarioConfig &c) {
  j = {{"n", c.n},
       {"d", c.d},
       {"variance", c.variance},
       {"eta", c.eta},
       {"history", c.history},
       {"followup", c.followup},
       {"beta", c.beta},
       {"treat_coef", c.treat_coef},
       {"lambda_scale", c.lambda_scale},
       {"exposure_threshold", c.exposure_threshold},
       {"replicates", c.replicates},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json &j, ScenarioConfig &c) {
  ScenarioConfig d;
  c.n = j.value("n", d.n);
  c.d = j.value("d", d.d);
  c.variance = j.value("variance", d.variance);
  c.eta = j.value("eta", d.eta);
  c.history = j.value("history", d.history);
  c.followup = j.value("followup", d.followup);
  c.beta = j.value("beta", d.beta);
  c.treat_coef = j.value("treat_coef", d.treat_coef);
  c.lambda_scale = j.value("lambda_scale", d.lambda_scale);
  c.exposure_threshold = j.value("exposure_threshold", d.exposure_threshold);
  c.replicates = j.value("replicates", d.replicates);
  c.seed = j.value("seed", d.seed);
}

} // namespace tcs::simgen
