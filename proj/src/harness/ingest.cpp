#include "tcs/harness/ingest.hpp"

#include "tcs/csv.hpp"
#include "tcs/error.hpp"
#include "tcs/seeds.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

namespace tcs::harness {

void IngestSpec::validate() const {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width))
    throw ConfigError("ingest: bin width must be positive");
  if (history < 1 || followup < 1)
    throw ConfigError("ingest: history and followup must be at least 1");
  if (id_col.empty() || time_col.empty() || treatment_col.empty())
    throw ConfigError("ingest: id, time and treatment columns are required");
}

void to_json(nlohmann::json &j, const IngestSpec &s) {
  j = {{"source", s.source.string()},   {"bin_width", s.bin_width},
       {"id_col", s.id_col},            {"time_col", s.time_col},
       {"covariates", s.covariates},    {"treatment_col", s.treatment_col},
       {"event_col", s.event_col},      {"censor_col", s.censor_col},
       {"history", s.history},          {"followup", s.followup}};
  j["origin"] = s.origin ? nlohmann::json(*s.origin) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json &j, IngestSpec &s) {
  IngestSpec d;
  s.source = j.value("source", d.source.string());
  s.bin_width = j.value("bin_width", d.bin_width);
  s.origin.reset();
  if (j.contains("origin") && !j.at("origin").is_null())
    s.origin = j.at("origin").get<double>();
  s.id_col = j.value("id_col", d.id_col);
  s.time_col = j.value("time_col", d.time_col);
  s.covariates = j.value("covariates", d.covariates);
  s.treatment_col = j.value("treatment_col", d.treatment_col);
  s.event_col = j.value("event_col", d.event_col);
  s.censor_col = j.value("censor_col", d.censor_col);
  s.history = j.value("history", d.history);
  s.followup = j.value("followup", d.followup);
}

namespace {

struct Observation {
  double time = 0.0;
  std::vector<double> x; // NaN where the cell is empty
  int treatment = -1;    // -1 when empty
};

struct Subject {
  std::string id;
  std::vector<Observation> obs;
  std::optional<long long> event;
  std::optional<long long> censor;
  bool bad = false;
};

std::optional<std::size_t> find_column(const std::vector<std::string> &header,
                                       const std::string &name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (csv::trim(header[i]) == name)
      return i;
  return std::nullopt;
}

std::size_t require_column(const std::vector<std::string> &header,
                           const std::string &name) {
  if (auto i = find_column(header, name))
    return *i;
  throw IngestionError("ingest: missing column '" + name + "'");
}

// Records the first non-empty value; conflicting later values flag the subject.
void note_time(Subject &s, std::optional<long long> &slot,
               const std::string &field) {
  const auto f = csv::trim(field);
  if (f.empty())
    return;
  long long v = 0;
  if (!csv::parse_int(f, v)) {
    s.bad = true;
    return;
  }
  if (slot && *slot != v)
    s.bad = true;
  slot = v;
}

} // namespace

IngestResult ingest_csv(const IngestSpec &spec) {
  spec.validate();
  std::ifstream is(spec.source);
  if (!is)
    throw IoError("cannot open ingest source: " + spec.source.string());
  std::string line;
  if (!std::getline(is, line))
    throw IngestionError("ingest: empty file " + spec.source.string());
  std::vector<std::string> header = csv::split(line);
  for (std::string &h : header)
    h = std::string(csv::trim(h));

  const std::size_t id_i = require_column(header, spec.id_col);
  const std::size_t time_i = require_column(header, spec.time_col);
  const std::size_t a_i = require_column(header, spec.treatment_col);
  std::optional<std::size_t> ev_i, ce_i;
  if (!spec.event_col.empty())
    ev_i = require_column(header, spec.event_col);
  if (!spec.censor_col.empty())
    ce_i = require_column(header, spec.censor_col);

  IngestResult out;
  out.covariates = spec.covariates;
  if (out.covariates.empty())
    for (const std::string &h : header)
      if (h.rfind("x_", 0) == 0)
        out.covariates.push_back(h);
  if (out.covariates.empty())
    throw IngestionError("ingest: no covariate columns (expected x_*)");
  std::vector<std::size_t> x_i;
  for (const std::string &c : out.covariates)
    x_i.push_back(require_column(header, c));
  const int D = static_cast<int>(out.covariates.size());

  std::vector<Subject> subjects;
  std::map<std::string, std::size_t> index;
  while (std::getline(is, line)) {
    if (csv::trim(line).empty())
      continue;
    ++out.rows_read;
    const auto f = csv::split(line);
    if (f.size() != header.size()) {
      ++out.rows_skipped;
      continue;
    }
    const std::string id(csv::trim(f[id_i]));
    Observation o;
    bool ok = !id.empty() && csv::parse_double(csv::trim(f[time_i]), o.time) &&
              std::isfinite(o.time);
    o.x.assign(static_cast<std::size_t>(D),
               std::numeric_limits<double>::quiet_NaN());
    for (int d = 0; ok && d < D; ++d) {
      const auto cell = csv::trim(f[x_i[static_cast<std::size_t>(d)]]);
      if (cell.empty())
        continue;
      double v = 0.0;
      ok = csv::parse_double(cell, v) && std::isfinite(v);
      o.x[static_cast<std::size_t>(d)] = v;
    }
    if (ok) {
      const auto cell = csv::trim(f[a_i]);
      long long a = 0;
      if (!cell.empty()) {
        ok = csv::parse_int(cell, a) && (a == 0 || a == 1);
        o.treatment = static_cast<int>(a);
      }
    }
    if (!ok) {
      ++out.rows_skipped;
      continue;
    }
    auto [it, fresh] = index.try_emplace(id, subjects.size());
    if (fresh)
      subjects.push_back(Subject{id, {}, std::nullopt, std::nullopt, false});
    Subject &s = subjects[it->second];
    if (ev_i)
      note_time(s, s.event, f[*ev_i]);
    if (ce_i)
      note_time(s, s.censor, f[*ce_i]);
    s.obs.push_back(std::move(o));
  }

  const int T = spec.max_steps();
  const int q = spec.followup;
  for (Subject &s : subjects) {
    const int event = s.event ? static_cast<int>(*s.event) : q + 1;
    const int censor = s.censor ? static_cast<int>(*s.censor) : q;
    if (s.bad || event < 1 || event > q + 1 || censor < 1 || censor > q) {
      ++out.subjects_skipped;
      continue;
    }
    double origin = 0.0;
    if (spec.origin) {
      origin = *spec.origin;
    } else {
      origin = s.obs.front().time;
      for (const Observation &o : s.obs)
        origin = std::min(origin, o.time);
    }

    LongitudinalSample smp = make_sample(s.id, spec.history, q, D);
    smp.mask.setZero();
    Matrix sum = Matrix::Zero(T, D);
    Eigen::MatrixXi count = Eigen::MatrixXi::Zero(T, D);
    std::vector<double> a_sum(static_cast<std::size_t>(T), 0.0);
    std::vector<int> a_count(static_cast<std::size_t>(T), 0);
    for (const Observation &o : s.obs) {
      const double b = std::floor((o.time - origin) / spec.bin_width);
      if (b < 0.0 || b >= T) {
        ++out.rows_truncated;
        continue;
      }
      const int r = static_cast<int>(b);
      for (int d = 0; d < D; ++d)
        if (!std::isnan(o.x[static_cast<std::size_t>(d)])) {
          sum(r, d) += o.x[static_cast<std::size_t>(d)];
          ++count(r, d);
        }
      if (o.treatment >= 0) {
        a_sum[static_cast<std::size_t>(r)] += o.treatment;
        ++a_count[static_cast<std::size_t>(r)];
      }
    }
    for (int r = 0; r < T; ++r)
      for (int d = 0; d < D; ++d)
        if (count(r, d) > 0) {
          smp.x(r, d) = sum(r, d) / count(r, d);
          smp.mask(r, d) = 1;
        }
    int carried = 0;
    for (std::size_t r = 0; r < static_cast<std::size_t>(T); ++r) {
      if (a_count[r] > 0)
        carried = a_sum[r] / a_count[r] >= 0.5 ? 1 : 0;
      smp.treatment[r] = carried;
    }
    smp.event_time = event;
    smp.censor_time = censor;
    smp.validate();
    out.samples.push_back(std::move(smp));
  }
  return out;
}

namespace {

std::vector<int> shuffled(std::size_t n, std::uint64_t seed) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

} // namespace

SubjectSplit holdout_split(std::size_t n, double test_fraction,
                           std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw UsageError("holdout fraction must lie in (0, 1)");
  const auto n_test =
      static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  if (n_test == 0 || n_test >= n)
    throw UsageError("holdout split leaves an empty side");
  const std::vector<int> order = shuffled(n, seed);
  SubjectSplit s;
  s.test.assign(order.begin(), order.begin() + static_cast<long>(n_test));
  s.train.assign(order.begin() + static_cast<long>(n_test), order.end());
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

std::vector<SubjectSplit> kfold_splits(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2 || static_cast<std::size_t>(k) > n)
    throw UsageError("k-fold needs 2 <= k <= number of subjects");
  const std::vector<int> order = shuffled(n, seed);
  std::vector<SubjectSplit> folds(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t fold = i * static_cast<std::size_t>(k) / n;
    for (std::size_t f = 0; f < folds.size(); ++f)
      (f == fold ? folds[f].test : folds[f].train).push_back(order[i]);
  }
  for (SubjectSplit &s : folds) {
    std::sort(s.test.begin(), s.test.end());
    std::sort(s.train.begin(), s.train.end());
  }
  return folds;
}

std::vector<LongitudinalSample> select(const std::vector<LongitudinalSample> &all,
                                       const std::vector<int> &rows) {
  std::vector<LongitudinalSample> out;
  out.reserve(rows.size());
  for (int r : rows) {
    if (r < 0 || static_cast<std::size_t>(r) >= all.size())
      throw SelectionError("subject index out of range");
    out.push_back(all[static_cast<std::size_t>(r)]);
  }
  return out;
}

} // namespace tcs::harness
