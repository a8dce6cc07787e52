#include "tcs/harness/results_io.hpp"

#include "tcs/csv.hpp"
#include "tcs/error.hpp"

#include <fstream>
#include <map>

namespace tcs::harness {

namespace fs = std::filesystem;
using csv::format_double;

namespace {

const char *kMetricsHeader =
    "scenario,replicate,seed,estimator,subgroup,time,rmse,mse,bias_ate,"
    "bias_ite,bias_skipped,coverage,concordance,auroc,auroc_pooled";
const char *kEffectsHeader =
    "scenario,replicate,estimator,id,time,ite,lo,hi,s1,s0,true_ite,hr_star";

std::string quote(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out += '"';
    out += c;
  }
  return out + "\"";
}

std::ofstream open_out(const fs::path &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw IoError("cannot open for writing: " + path.string());
  return os;
}

void finish(std::ofstream &os, const fs::path &path) {
  os.flush();
  if (!os)
    throw IoError("failed writing " + path.string());
}

double num(const std::string &field, const fs::path &path, std::size_t line) {
  double v = 0.0;
  if (!csv::parse_double(field, v))
    throw DataError(path.string() + ":" + std::to_string(line) +
                    ": not a number: '" + field + "'");
  return v;
}

long long integer(const std::string &field, const fs::path &path,
                  std::size_t line) {
  long long v = 0;
  if (!csv::parse_int(field, v))
    throw DataError(path.string() + ":" + std::to_string(line) +
                    ": not an integer: '" + field + "'");
  return v;
}

std::vector<std::vector<std::string>> read_rows(const fs::path &path,
                                                const char *header) {
  std::ifstream is(path);
  if (!is)
    throw IoError("cannot open: " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != header)
    throw DataError(path.string() + ": unexpected header");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(is, line))
    if (!csv::trim(line).empty())
      rows.push_back(csv::split(line));
  return rows;
}

} // namespace

void write_metrics(const fs::path &path,
                   const std::vector<metrics::MetricReport> &reports) {
  std::ofstream os = open_out(path);
  os << kMetricsHeader << '\n';
  for (const metrics::MetricReport &r : reports) {
    const std::string key = quote(r.scenario) + ',' + std::to_string(r.replicate) +
                            ',' + std::to_string(r.seed) + ',' +
                            quote(r.estimator) + ',' + quote(r.subgroup) + ',';
    int skipped = 0;
    for (int t = 0; t < r.steps(); ++t) {
      const int sk = r.bias_skipped[static_cast<std::size_t>(t)];
      skipped += sk;
      os << key << (t + 1) << ',' << format_double(r.rmse(t)) << ','
         << format_double(r.mse(t)) << ',' << format_double(r.bias_ate(t)) << ','
         << format_double(r.bias_ite(t)) << ',' << sk << ','
         << format_double(r.coverage(t)) << ','
         << format_double(r.concordance(t)) << ','
         << format_double(r.auroc(t)) << ','
         << format_double(r.auroc_pooled) << '\n';
    }
    using metrics::nanmean;
    os << key << "mean," << format_double(nanmean(r.rmse)) << ','
       << format_double(nanmean(r.mse)) << ',' << format_double(nanmean(r.bias_ate))
       << ',' << format_double(nanmean(r.bias_ite)) << ',' << skipped << ','
       << format_double(nanmean(r.coverage)) << ','
       << format_double(nanmean(r.concordance)) << ','
       << format_double(nanmean(r.auroc)) << ','
       << format_double(r.auroc_pooled) << '\n';
  }
  finish(os, path);
}

std::vector<metrics::MetricReport> read_metrics(const fs::path &path) {
  const auto rows = read_rows(path, kMetricsHeader);
  // Collect per-step values keyed by report identity, in file order.
  struct Acc {
    metrics::MetricReport head;
    std::map<int, std::array<double, 8>> steps;
    std::map<int, int> skipped;
  };
  std::vector<Acc> acc;
  std::map<std::string, std::size_t> index;
  std::size_t line = 1;
  for (const auto &f : rows) {
    ++line;
    if (f.size() != 15)
      throw DataError(path.string() + ":" + std::to_string(line) +
                      ": expected 15 fields");
    if (f[5] == "mean")
      continue;
    const std::string key = f[0] + '\x1f' + f[1] + '\x1f' + f[3] + '\x1f' + f[4];
    auto [it, fresh] = index.try_emplace(key, acc.size());
    if (fresh) {
      Acc a;
      a.head.scenario = f[0];
      a.head.replicate = static_cast<int>(integer(f[1], path, line));
      a.head.seed = std::stoull(f[2]);
      a.head.estimator = f[3];
      a.head.subgroup = f[4];
      a.head.auroc_pooled = num(f[14], path, line);
      acc.push_back(std::move(a));
    }
    Acc &a = acc[it->second];
    const int t = static_cast<int>(integer(f[5], path, line));
    a.steps[t] = {num(f[6], path, line),  num(f[7], path, line),
                  num(f[8], path, line),  num(f[9], path, line),
                  num(f[11], path, line), num(f[12], path, line),
                  num(f[13], path, line), 0.0};
    a.skipped[t] = static_cast<int>(integer(f[10], path, line));
  }
  std::vector<metrics::MetricReport> out;
  for (Acc &a : acc) {
    const int q = static_cast<int>(a.steps.size());
    metrics::MetricReport r = metrics::MetricReport::empty(q);
    r.scenario = a.head.scenario;
    r.replicate = a.head.replicate;
    r.seed = a.head.seed;
    r.estimator = a.head.estimator;
    r.subgroup = a.head.subgroup;
    r.auroc_pooled = a.head.auroc_pooled;
    int k = 0;
    for (const auto &[t, v] : a.steps) {
      if (t != k + 1)
        throw DataError(path.string() + ": report " + r.estimator +
                        " has a gap in its time steps");
      r.rmse(k) = v[0];
      r.mse(k) = v[1];
      r.bias_ate(k) = v[2];
      r.bias_ite(k) = v[3];
      r.coverage(k) = v[4];
      r.concordance(k) = v[5];
      r.auroc(k) = v[6];
      r.bias_skipped[static_cast<std::size_t>(k)] = a.skipped[t];
      ++k;
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_effects(const fs::path &path, const std::vector<EffectRow> &rows) {
  std::ofstream os = open_out(path);
  os << kEffectsHeader << '\n';
  for (const EffectRow &r : rows)
    os << quote(r.scenario) << ',' << r.replicate << ',' << quote(r.estimator)
       << ',' << quote(r.id) << ',' << r.time << ',' << format_double(r.ite) << ','
       << format_double(r.lo) << ',' << format_double(r.hi) << ','
       << format_double(r.s1) << ',' << format_double(r.s0) << ','
       << format_double(r.true_ite) << ',' << format_double(r.hr_star) << '\n';
  finish(os, path);
}

std::vector<EffectRow> read_effects(const fs::path &path) {
  const auto rows = read_rows(path, kEffectsHeader);
  std::vector<EffectRow> out;
  std::size_t line = 1;
  for (const auto &f : rows) {
    ++line;
    if (f.size() != 12)
      throw DataError(path.string() + ":" + std::to_string(line) +
                      ": expected 12 fields");
    EffectRow r;
    r.scenario = f[0];
    r.replicate = static_cast<int>(integer(f[1], path, line));
    r.estimator = f[2];
    r.id = f[3];
    r.time = static_cast<int>(integer(f[4], path, line));
    r.ite = num(f[5], path, line);
    r.lo = num(f[6], path, line);
    r.hi = num(f[7], path, line);
    r.s1 = num(f[8], path, line);
    r.s0 = num(f[9], path, line);
    r.true_ite = num(f[10], path, line);
    r.hr_star = num(f[11], path, line);
    out.push_back(std::move(r));
  }
  return out;
}

void write_failures(const fs::path &path, const std::vector<Failure> &failures) {
  std::ofstream os = open_out(path);
  os << "scenario,replicate,estimator,category,message\n";
  for (const Failure &f : failures)
    os << quote(f.scenario) << ',' << f.replicate << ',' << quote(f.estimator)
       << ',' << quote(f.category) << ',' << quote(f.message) << '\n';
  finish(os, path);
}

nlohmann::json provenance(const RunConfig &config, const RunResult &result) {
  nlohmann::json j = config;
  j["version"] = version();
  nlohmann::json ledger = nlohmann::json::array();
  for (const SeedRecord &s : result.ledger)
    ledger.push_back({{"scenario", s.scenario},
                      {"replicate", s.replicate},
                      {"base_seed", config.scenario.seed},
                      {"train_seed", s.seeds.train},
                      {"test_seed", s.seeds.test},
                      {"model_seed", s.seeds.model},
                      {"adjust_seed", s.seeds.adjust},
                      {"member_seeds", s.members}});
  j["seed_ledger"] = ledger;
  return j;
}

void export_results(const fs::path &dir, const RunConfig &config,
                    const RunResult &result) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw IoError("cannot create output directory " + dir.string() + ": " +
                  ec.message());
  write_metrics(dir / "metrics.csv", result.reports);
  write_effects(dir / "effects.csv", result.effects);
  write_failures(dir / "failures.csv", result.failures);
  std::ofstream js = open_out(dir / "config.json");
  js << provenance(config, result).dump(2) << '\n';
  finish(js, dir / "config.json");
}

RunConfig load_run_config(const fs::path &path) {
  std::ifstream is(path);
  if (!is)
    throw IoError("cannot open config: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  RunConfig c = preset(j.value("preset", std::string("desk")));
  merge_json(j, c);
  return c;
}

} // namespace tcs::harness
