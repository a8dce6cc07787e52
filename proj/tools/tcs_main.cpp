#include "tcs/error.hpp"
#include "tcs/harness/config.hpp"
#include "tcs/harness/ingest.hpp"
#include "tcs/harness/results_io.hpp"
#include "tcs/harness/runner.hpp"
#include "tcs/simgen/dataset_io.hpp"
#include "tcs/tcsnet/persist.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace tcs;

namespace {

// Flags shared by the verbs that build a run configuration.
struct RunFlags {
  std::string config;
  std::string preset;
  std::string scenario;
  int replicates = 0;
  std::optional<std::uint64_t> seed;
  std::string estimators;

  void attach(CLI::App &app) {
    app.add_option("--config", config, "Run configuration JSON (e.g. a config.json)");
    app.add_option("--preset", preset, "desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}));
    app.add_option("--scenario", scenario, "default, eta=<v>, V=<v>, D=<v> or N=<v>");
    app.add_option("--replicates", replicates, "Number of replicates")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Base seed");
    app.add_option("--estimators", estimators, "Comma list or 'all'");
  }

  harness::RunConfig build() const {
    harness::RunConfig c;
    if (!config.empty()) {
      c = harness::load_run_config(config);
      if (!preset.empty() && preset != c.preset) {
        harness::RunConfig base = harness::preset(preset);
        std::ifstream is(config);
        harness::merge_json(nlohmann::json::parse(is), base);
        base.preset = preset;
        c = base;
      }
    } else {
      c = harness::preset(preset.empty() ? "desk" : preset);
    }
    if (!scenario.empty()) {
      c.scenario = harness::named_scenario(scenario, c.scenario);
      c.scenario_name = scenario;
    }
    if (replicates > 0)
      c.scenario.replicates = replicates;
    if (seed) {
      c.scenario.seed = *seed;
      c.train.seed = *seed;
    }
    if (!estimators.empty())
      c.estimators = harness::parse_estimators(estimators);
    c.validate();
    return c;
  }
};

void print_failures(const harness::RunResult &r) {
  for (const harness::Failure &f : r.failures)
    std::cerr << "failure: " << f.scenario << " replicate " << f.replicate << ' '
              << f.estimator << " [" << f.category << "] " << f.message << '\n';
}

void cmd_simulate(const RunFlags &flags, const fs::path &out) {
  const harness::RunConfig c = flags.build();
  fs::create_directories(out);
  for (int r = 0; r < c.scenario.replicates; ++r) {
    const harness::ReplicateSeeds seeds = harness::replicate_seeds(c.scenario.seed, r);
    for (const auto &[role, seed] :
         {std::pair{"train", seeds.train}, std::pair{"test", seeds.test}}) {
      const simgen::Dataset d = simgen::generate(c.scenario, seed);
      const std::string stem = "rep" + std::to_string(r) + "_" + role;
      simgen::write_dataset(out / (stem + ".csv"), d.samples, seed, c.scenario);
      simgen::write_truth(out / (stem + "_truth.csv"), d.samples, *d.truth);
    }
  }
  std::cout << "wrote " << c.scenario.replicates << " train/test pairs to "
            << out.string() << '\n';
}

std::vector<LongitudinalSample> load_or_generate(const std::string &data,
                                                 const harness::RunConfig &c) {
  if (!data.empty())
    return simgen::read_dataset(data).samples;
  return simgen::generate(c.scenario, harness::replicate_seeds(c.scenario.seed, 0).train)
      .samples;
}

tcsnet::EnsembleModel fit_kind(const std::vector<LongitudinalSample> &train,
                               const harness::RunConfig &c,
                               const std::string &kind) {
  tcsnet::TrainConfig t = c.train;
  t.kind = tcsnet::parse_kind(kind);
  return tcsnet::train_ensemble(train, t);
}

// Held-out discrimination of the observed-path survival curve.
metrics::MetricReport heldout_report(const tcsnet::EnsembleModel &model,
                                     const std::vector<LongitudinalSample> &test,
                                     const std::string &kind, int fold) {
  const tcsnet::EffectEstimate e = tcsnet::estimate_effects(model, test);
  metrics::MetricReport r =
      metrics::MetricReport::empty(static_cast<int>(e.ite.cols()));
  harness::fill_discrimination(r, e.survival_obs, test);
  r.scenario = "heldout";
  r.replicate = fold;
  r.seed = model.config.seed;
  r.estimator = kind;
  return r;
}

void cmd_fit(const RunFlags &flags, const std::string &data,
             const std::string &kind, double holdout, int folds,
             const fs::path &out) {
  const harness::RunConfig c = flags.build();
  const std::vector<LongitudinalSample> all = load_or_generate(data, c);
  fs::create_directories(out);
  std::vector<metrics::MetricReport> reports;
  if (folds > 0) {
    const auto splits = harness::kfold_splits(all.size(), folds, c.train.seed);
    for (std::size_t f = 0; f < splits.size(); ++f) {
      const auto model = fit_kind(harness::select(all, splits[f].train), c, kind);
      reports.push_back(heldout_report(model, harness::select(all, splits[f].test),
                                       kind, static_cast<int>(f)));
      tcsnet::save_ensemble(out / ("model_fold" + std::to_string(f) + ".tcsm"), model);
    }
  } else if (holdout > 0.0) {
    const auto split = harness::holdout_split(all.size(), holdout, c.train.seed);
    const auto model = fit_kind(harness::select(all, split.train), c, kind);
    reports.push_back(
        heldout_report(model, harness::select(all, split.test), kind, 0));
    tcsnet::save_ensemble(out / "model.tcsm", model);
  } else {
    tcsnet::save_ensemble(out / "model.tcsm", fit_kind(all, c, kind));
  }
  if (!reports.empty())
    harness::write_metrics(out / "metrics.csv", reports);
  std::ofstream js(out / "config.json");
  js << nlohmann::json(c).dump(2) << '\n';
  std::cout << "model written to " << out.string() << '\n';
}

void cmd_bench(const RunFlags &flags, const fs::path &out) {
  const harness::RunConfig c = flags.build();
  const harness::RunResult r = harness::run_bench(c);
  harness::export_results(out, c, r);
  print_failures(r);
  std::cout << r.reports.size() << " reports, " << r.failures.size()
            << " failures written to " << out.string() << '\n';
}

void cmd_effects(const std::string &model_path, const std::string &data,
                 const fs::path &out) {
  const tcsnet::EnsembleModel model = tcsnet::load_ensemble(model_path);
  const std::vector<LongitudinalSample> samples = simgen::read_dataset(data).samples;
  const tcsnet::EffectEstimate e = tcsnet::estimate_effects(model, samples);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::string kind = tcsnet::kind_name(model.kind());
  std::vector<harness::EffectRow> rows;
  for (Eigen::Index i = 0; i < e.ite.rows(); ++i)
    for (Eigen::Index t = 0; t < e.ite.cols(); ++t)
      rows.push_back({"data", 0, kind, e.ids[static_cast<std::size_t>(i)],
                      static_cast<int>(t + 1), e.ite(i, t), e.ite_lo(i, t),
                      e.ite_hi(i, t), e.survival_1(i, t), e.survival_0(i, t), nan,
                      nan});
  for (Eigen::Index t = 0; t < e.cate.size(); ++t)
    rows.push_back({"data", 0, kind, harness::kAteRowId, static_cast<int>(t + 1),
                    e.cate(t), e.cate_lo(t), e.cate_hi(t), e.survival_1.col(t).mean(),
                    e.survival_0.col(t).mean(), nan, e.hr_star(t)});
  if (out.has_parent_path())
    fs::create_directories(out.parent_path());
  harness::write_effects(out, rows);
  std::cout << rows.size() << " effect rows written to " << out.string() << '\n';
}

void cmd_ingest(harness::IngestSpec spec, const std::string &spec_path,
                const fs::path &input, const fs::path &out) {
  if (!spec_path.empty()) {
    std::ifstream is(spec_path);
    if (!is)
      throw IoError("cannot open ingest spec: " + spec_path);
    try {
      spec = nlohmann::json::parse(is).get<harness::IngestSpec>();
    } catch (const nlohmann::json::exception &e) {
      throw ConfigError("invalid ingest spec " + spec_path + ": " + e.what());
    }
  }
  if (!input.empty())
    spec.source = input;
  const harness::IngestResult r = harness::ingest_csv(spec);
  if (r.samples.empty())
    throw IngestionError("ingest: no usable subjects in " + spec.source.string());
  if (out.has_parent_path())
    fs::create_directories(out.parent_path());
  simgen::write_dataset(out, r.samples, 0, std::nullopt);
  std::cout << r.samples.size() << " subjects from " << r.rows_read << " rows; "
            << r.rows_skipped << " malformed rows skipped, " << r.rows_truncated
            << " rows outside the grid, " << r.subjects_skipped
            << " subjects skipped\n";
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Treatment effects on survival from longitudinal data"};
  app.set_version_flag("--version", harness::version());
  app.require_subcommand(1);

  RunFlags sim_flags, fit_flags, bench_flags;
  std::string out_dir = "out";

  CLI::App *sim = app.add_subcommand("simulate", "Emit simulated train/test datasets");
  sim_flags.attach(*sim);
  sim->add_option("--out", out_dir, "Output directory");

  std::string fit_data, fit_kind_name = "tcs";
  double holdout = 0.0;
  int folds = 0;
  CLI::App *fit = app.add_subcommand("fit", "Train one estimator");
  fit_flags.attach(*fit);
  fit->add_option("--data", fit_data, "Canonical dataset CSV (default: simulate)");
  fit->add_option("--model", fit_kind_name, "tcs, snn or binary")
      ->check(CLI::IsMember({"tcs", "snn", "binary"}));
  auto *ho = fit->add_option("--holdout", holdout, "Held-out subject fraction")
                 ->check(CLI::Range(0.0, 1.0));
  fit->add_option("--folds", folds, "k-fold cross validation")
      ->check(CLI::Range(2, 1000))
      ->excludes(ho);
  fit->add_option("--out", out_dir, "Output directory");

  CLI::App *bench = app.add_subcommand("bench", "Run a scenario or sweep");
  bench_flags.attach(*bench);
  bench->add_option("--out", out_dir, "Output directory");

  std::string eff_model, eff_data, eff_out = "effects.csv";
  CLI::App *eff = app.add_subcommand("effects", "Counterfactual curves of a fitted model");
  eff->add_option("--model", eff_model, "Model file written by fit")->required();
  eff->add_option("--data", eff_data, "Canonical dataset CSV")->required();
  eff->add_option("--out", eff_out, "effects.csv path");

  harness::IngestSpec ingest_spec;
  std::string ingest_spec_path, ingest_input, ingest_out = "dataset.csv";
  CLI::App *ing = app.add_subcommand("ingest", "Long-format CSV to a canonical dataset");
  ing->add_option("--input", ingest_input, "Raw CSV");
  ing->add_option("--spec", ingest_spec_path, "IngestSpec JSON");
  ing->add_option("--bin-width", ingest_spec.bin_width, "Time bin width");
  ing->add_option("--history", ingest_spec.history, "History steps u");
  ing->add_option("--followup", ingest_spec.followup, "Follow-up steps q");
  ing->add_option("--out", ingest_out, "Output dataset CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorCategory::Usage);
  }

  try {
    if (*sim)
      cmd_simulate(sim_flags, out_dir);
    else if (*fit)
      cmd_fit(fit_flags, fit_data, fit_kind_name, holdout, folds, out_dir);
    else if (*bench)
      cmd_bench(bench_flags, out_dir);
    else if (*eff)
      cmd_effects(eff_model, eff_data, eff_out);
    else if (*ing)
      cmd_ingest(ingest_spec, ingest_spec_path, ingest_input, ingest_out);
  } catch (const Error &e) {
    std::cerr << "error [" << category_name(e.category()) << "]: " << e.what()
              << '\n';
    return e.exit_code();
  } catch (const std::exception &e) {
    std::cerr << "error [internal]: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
