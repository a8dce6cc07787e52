#include "tcs/simgen/dataset_io.hpp"

#include "tcs/csv.hpp"
#include "tcs/error.hpp"

#include <fstream>
#include <map>

namespace tcs::simgen {

namespace fs = std::filesystem;
using csv::format_double;

fs::path sidecar_path(const fs::path &csv) {
  fs::path p = csv;
  p.replace_extension(".json");
  return p;
}

void write_dataset(const fs::path &path,
                   const std::vector<LongitudinalSample> &samples,
                   std::uint64_t seed,
                   const std::optional<ScenarioConfig> &config) {
  if (samples.empty())
    throw DataError("write_dataset: no samples");
  const LongitudinalSample &first = samples.front();
  const int D = first.dims();

  std::ofstream os(path);
  if (!os)
    throw IoError("cannot open for writing: " + path.string());
  os << "id,time";
  for (int d = 1; d <= D; ++d)
    os << ",x_" << d;
  os << ",a,event_time,censor_time,y\n";
  for (const LongitudinalSample &s : samples) {
    if (s.dims() != D || s.history != first.history ||
        s.followup != first.followup)
      throw DataError("write_dataset: samples have inconsistent shapes");
    for (int t = 0; t < s.steps(); ++t) {
      os << s.id << ',' << (t + 1);
      for (int d = 0; d < D; ++d) {
        os << ',';
        if (s.mask(t, d))
          os << format_double(s.x(t, d));
      }
      os << ',' << s.treatment[static_cast<std::size_t>(t)] << ','
         << s.event_time << ',' << s.censor_time << ',' << (s.event() ? 1 : 0)
         << '\n';
    }
  }
  if (!os)
    throw IoError("failed writing " + path.string());

  nlohmann::json side = {{"format_version", 1},
                         {"history", first.history},
                         {"followup", first.followup},
                         {"dims", D},
                         {"seed", seed}};
  if (config)
    side["scenario"] = *config;
  std::ofstream js(sidecar_path(path));
  if (!js)
    throw IoError("cannot open for writing: " + sidecar_path(path).string());
  js << side.dump(2) << '\n';
}

DatasetFile read_dataset(const fs::path &path) {
  const fs::path side = sidecar_path(path);
  std::ifstream js(side);
  if (!js)
    throw IoError("missing dataset sidecar: " + side.string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(js);
  } catch (const nlohmann::json::exception &e) {
    throw IoError("corrupt sidecar " + side.string() + ": " + e.what());
  }
  DatasetFile out;
  out.history = meta.at("history").get<int>();
  out.followup = meta.at("followup").get<int>();
  out.dims = meta.at("dims").get<int>();
  out.seed = meta.value("seed", std::uint64_t{0});
  if (meta.contains("scenario"))
    out.config = meta.at("scenario").get<ScenarioConfig>();

  std::ifstream is(path);
  if (!is)
    throw IoError("cannot open dataset: " + path.string());
  std::string line;
  if (!std::getline(is, line))
    throw DataError("empty dataset file: " + path.string());
  const auto header = csv::split(line);
  const std::size_t expect = static_cast<std::size_t>(out.dims) + 6;
  if (header.size() != expect || header[0] != "id" || header[1] != "time")
    throw DataError("dataset header does not match sidecar dims: " +
                    path.string());

  const int T = out.history + out.followup;
  std::map<std::string, std::size_t> index;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (csv::trim(line).empty())
      continue;
    const auto f = csv::split(line);
    const auto bad = [&](const std::string &msg) {
      return DataError(path.string() + ":" + std::to_string(lineno) + ": " + msg);
    };
    if (f.size() != expect)
      throw bad("wrong field count");
    long long step = 0, a = 0, ev = 0, ce = 0;
    if (!csv::parse_int(f[1], step) || step < 1 || step > T)
      throw bad("time outside 1.." + std::to_string(T));
    const std::size_t tail = 2 + static_cast<std::size_t>(out.dims);
    if (!csv::parse_int(f[tail], a) || !csv::parse_int(f[tail + 1], ev) ||
        !csv::parse_int(f[tail + 2], ce))
      throw bad("unparseable treatment or time field");

    auto [it, fresh] = index.try_emplace(f[0], out.samples.size());
    if (fresh) {
      LongitudinalSample s =
          make_sample(f[0], out.history, out.followup, out.dims);
      s.mask.setZero();
      s.event_time = static_cast<int>(ev);
      s.censor_time = static_cast<int>(ce);
      out.samples.push_back(std::move(s));
    }
    LongitudinalSample &s = out.samples[it->second];
    const int r = static_cast<int>(step) - 1;
    for (int d = 0; d < out.dims; ++d) {
      double v = 0.0;
      const std::string &cell = f[2 + static_cast<std::size_t>(d)];
      if (csv::trim(cell).empty())
        continue;
      if (!csv::parse_double(cell, v))
        throw bad("unparseable covariate value '" + cell + "'");
      s.x(r, d) = v;
      s.mask(r, d) = 1;
    }
    s.treatment[static_cast<std::size_t>(r)] = static_cast<int>(a);
  }
  for (const LongitudinalSample &s : out.samples)
    s.validate();
  return out;
}

void write_truth(const fs::path &path,
                 const std::vector<LongitudinalSample> &samples,
                 const GroundTruth &truth) {
  std::ofstream os(path);
  if (!os)
    throw IoError("cannot open for writing: " + path.string());
  os << "id,time,ite,s1,s0,h1,h0\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index k = 0; k < truth.ite.cols(); ++k)
      os << samples[i].id << ',' << (k + 1) << ','
         << format_double(truth.ite(r, k)) << ','
         << format_double(truth.survival_1(r, k)) << ','
         << format_double(truth.survival_0(r, k)) << ','
         << format_double(truth.hazard_1(r, k)) << ','
         << format_double(truth.hazard_0(r, k)) << '\n';
  }
  if (!os)
    throw IoError("failed writing " + path.string());
}

} // namespace tcs::simgen
