#include "tcs/harness/config.hpp"

#include "tcs/csv.hpp"
#include "tcs/error.hpp"

#include <algorithm>
#include <sstream>

namespace tcs::harness {

const char *version() { return "tcs 1.0.0"; }

void to_json(nlohmann::json &j, const SweepSpec &s) {
  j = nlohmann::json::object();
  if (!s.variance.empty())
    j["variance"] = s.variance;
  if (!s.d.empty())
    j["d"] = s.d;
  if (!s.eta.empty())
    j["eta"] = s.eta;
  if (!s.n.empty())
    j["n"] = s.n;
}

void from_json(const nlohmann::json &j, SweepSpec &s) {
  s.variance = j.value("variance", std::vector<double>{});
  s.d = j.value("d", std::vector<int>{});
  s.eta = j.value("eta", std::vector<double>{});
  s.n = j.value("n", std::vector<int>{});
}

SweepSpec paper_sweep() {
  return SweepSpec{{0.5, 1.0, 1.5, 2.0}, {6, 10, 20, 40}, {0.7, 0.8, 0.9, 1.0},
                   {1500, 3000, 10000}};
}

namespace {

template <class T> std::vector<std::optional<T>> axis(const std::vector<T> &v) {
  if (v.empty())
    return {std::nullopt};
  return {v.begin(), v.end()};
}

std::string fmt(double v) { return csv::format_double(v); }

} // namespace

std::vector<SweepCell> expand_sweep(const SweepSpec &sweep,
                                    const simgen::ScenarioConfig &base,
                                    const std::string &base_name) {
  std::vector<SweepCell> cells;
  if (sweep.empty()) {
    base.validate();
    cells.push_back({base_name, base});
    return cells;
  }
  for (const auto &v : axis(sweep.variance))
    for (const auto &d : axis(sweep.d))
      for (const auto &eta : axis(sweep.eta))
        for (const auto &n : axis(sweep.n)) {
          simgen::ScenarioConfig c = base;
          std::vector<std::string> parts;
          if (v) {
            c.variance = *v;
            parts.push_back("V=" + fmt(*v));
          }
          if (d) {
            c.d = *d;
            parts.push_back("D=" + std::to_string(*d));
          }
          if (eta) {
            c.eta = *eta;
            parts.push_back("eta=" + fmt(*eta));
          }
          if (n) {
            c.n = *n;
            parts.push_back("N=" + std::to_string(*n));
          }
          c.validate();
          std::string name;
          for (std::size_t i = 0; i < parts.size(); ++i)
            name += (i ? ";" : "") + parts[i];
          cells.push_back({name, c});
        }
  return cells;
}

void RunConfig::validate() const {
  scenario.validate();
  train.validate();
  adjust_propensity.validate();
  if (estimators.empty())
    throw ConfigError("estimator list is empty");
  for (const std::string &e : estimators)
    if (std::find(kAllEstimators.begin(), kAllEstimators.end(), e) ==
        kAllEstimators.end())
      throw ConfigError("unknown estimator '" + e + "'");
  if (sweep.variance.empty() && sweep.d.empty() && sweep.eta.empty() &&
      sweep.n.empty())
    return;
  expand_sweep(sweep, scenario, scenario_name);
}

void to_json(nlohmann::json &j, const RunConfig &c) {
  j = {{"preset", c.preset},
       {"scenario_name", c.scenario_name},
       {"scenario", c.scenario},
       {"train", c.train},
       {"adjust_propensity", c.adjust_propensity},
       {"estimators", c.estimators},
       {"sweep", c.sweep}};
}

void merge_json(const nlohmann::json &j, RunConfig &c) {
  try {
    if (j.contains("preset"))
      c.preset = j.at("preset").get<std::string>();
    if (j.contains("scenario_name"))
      c.scenario_name = j.at("scenario_name").get<std::string>();
    if (j.contains("scenario")) {
      nlohmann::json s = c.scenario;
      s.update(j.at("scenario"));
      c.scenario = s.get<simgen::ScenarioConfig>();
    }
    if (j.contains("train")) {
      nlohmann::json t = c.train;
      t.update(j.at("train"));
      c.train = t.get<tcsnet::TrainConfig>();
    }
    if (j.contains("adjust_propensity")) {
      nlohmann::json p = c.adjust_propensity;
      p.update(j.at("adjust_propensity"));
      c.adjust_propensity = p.get<tcsnet::PropensityConfig>();
    }
    if (j.contains("estimators"))
      c.estimators = j.at("estimators").get<std::vector<std::string>>();
    if (j.contains("sweep"))
      c.sweep = j.at("sweep").get<SweepSpec>();
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("invalid run configuration: ") + e.what());
  }
}

RunConfig preset(const std::string &name) {
  RunConfig c;
  c.preset = name;
  if (name == "desk") {
    c.scenario.n = 500;
    c.scenario.replicates = 5;
    c.train.members = 5;
    c.train.hidden = 32;
    c.train.epochs = 20;
    c.train.batch = 32;
    c.train.lr = 3e-3;
    c.train.propensity.epochs = 10;
    c.adjust_propensity = c.train.propensity;
  } else if (name == "paper") {
    c.scenario.n = 1500;
    c.scenario.replicates = 50;
    c.train.members = 20;
    c.train.hidden = 64;
    c.train.epochs = 30;
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected desk or paper)");
  }
  c.train.seed = c.scenario.seed;
  return c;
}

simgen::ScenarioConfig named_scenario(const std::string &name,
                                      simgen::ScenarioConfig base) {
  if (name == "default")
    return base;
  const auto eq = name.find('=');
  if (eq == std::string::npos)
    throw ConfigError("unknown scenario '" + name + "'");
  const std::string key = name.substr(0, eq);
  const std::string value = name.substr(eq + 1);
  double v = 0.0;
  if (!csv::parse_double(value, v))
    throw ConfigError("scenario '" + name + "': value is not a number");
  if (key == "eta")
    base.eta = v;
  else if (key == "V")
    base.variance = v;
  else if (key == "D")
    base.d = static_cast<int>(v);
  else if (key == "N")
    base.n = static_cast<int>(v);
  else
    throw ConfigError("scenario '" + name + "': unknown parameter '" + key + "'");
  base.validate();
  return base;
}

std::vector<std::string> parse_estimators(const std::string &list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t{csv::trim(item)};
    if (t.empty())
      continue;
    if (t == "all")
      return kAllEstimators;
    if (std::find(kAllEstimators.begin(), kAllEstimators.end(), t) ==
        kAllEstimators.end())
      throw ConfigError("unknown estimator '" + t + "'");
    out.push_back(t);
  }
  if (out.empty())
    throw ConfigError("estimator list is empty");
  return out;
}

} // namespace tcs::harness
