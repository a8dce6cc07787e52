#pragma once

#include "tcs/sample.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tcs::harness {

// Long-format CSV with one row per raw observation. Observation times are
// binned onto the grid s = 1..history+followup with
//   s = floor((time - origin) / bin_width) + 1
// where origin defaults to each subject's first observation time. Rows past
// the grid are truncated. Covariates are averaged within a bin; a bin without
// an observation of a covariate stays masked. Treatment in a bin is the mean
// rounded at 0.5 and is carried forward into bins without a record.
//
// Event and censor columns hold follow-up step indices and are read from the
// subject's first row that has them; an empty event means no event (q + 1),
// an empty censor means administrative end (q).
struct IngestSpec {
  std::filesystem::path source;
  double bin_width = 1.0;
  std::optional<double> origin;
  std::string id_col = "id";
  std::string time_col = "time";
  std::vector<std::string> covariates; // empty: every column named x_*
  std::string treatment_col = "a";
  std::string event_col = "event_time";
  std::string censor_col = "censor_time";
  int history = 5;
  int followup = 10;

  int max_steps() const { return history + followup; }
  // Throws ConfigError.
  void validate() const;
};

void to_json(nlohmann::json &j, const IngestSpec &s);
void from_json(const nlohmann::json &j, IngestSpec &s);

struct IngestResult {
  std::vector<LongitudinalSample> samples; // in order of first appearance
  std::vector<std::string> covariates;
  std::size_t rows_read = 0;
  std::size_t rows_skipped = 0;   // malformed
  std::size_t rows_truncated = 0; // outside the grid
  std::size_t subjects_skipped = 0;
};

// Throws IoError when the file cannot be read and IngestionError naming the
// column when a declared column is absent.
IngestResult ingest_csv(const IngestSpec &spec);

struct SubjectSplit {
  std::vector<int> train;
  std::vector<int> test;
};

// Subject-level shuffle split; test receives round(test_fraction * n).
SubjectSplit holdout_split(std::size_t n, double test_fraction,
                           std::uint64_t seed);

// k folds of a shuffled subject order; fold i tests on the i-th block.
std::vector<SubjectSplit> kfold_splits(std::size_t n, int k, std::uint64_t seed);

std::vector<LongitudinalSample> select(const std::vector<LongitudinalSample> &all,
                                       const std::vector<int> &rows);

} // namespace tcs::harness
