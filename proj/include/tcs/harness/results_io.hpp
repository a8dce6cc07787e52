#pragma once

#include "tcs/harness/runner.hpp"

#include <filesystem>

// Result files of a run directory.
//
//   metrics.csv   scenario,replicate,seed,estimator,subgroup,time,rmse,mse,
//                 bias_ate,bias_ite,bias_skipped,coverage,concordance,auroc,
//                 auroc_pooled
//                 time is the follow-up step; a closing row per report with
//                 time "mean" holds the averages over steps
//   effects.csv   scenario,replicate,estimator,id,time,ite,lo,hi,s1,s0,
//                 true_ite,hr_star
//   failures.csv  scenario,replicate,estimator,category,message
//   config.json   run configuration, version and seed ledger; accepted back by
//                 --config
namespace tcs::harness {

void write_metrics(const std::filesystem::path &path,
                   const std::vector<metrics::MetricReport> &reports);
// Per-step rows only; mean rows are derived and skipped.
std::vector<metrics::MetricReport> read_metrics(const std::filesystem::path &path);

void write_effects(const std::filesystem::path &path,
                   const std::vector<EffectRow> &rows);
std::vector<EffectRow> read_effects(const std::filesystem::path &path);

void write_failures(const std::filesystem::path &path,
                    const std::vector<Failure> &failures);

nlohmann::json provenance(const RunConfig &config, const RunResult &result);

// Creates dir and writes all four files. Throws IoError naming the path.
void export_results(const std::filesystem::path &dir, const RunConfig &config,
                    const RunResult &result);

// Reads config.json (or any run configuration JSON) over the preset it names.
RunConfig load_run_config(const std::filesystem::path &path);

} // namespace tcs::harness
