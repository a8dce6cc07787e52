#include "tcs/error.hpp"
#include "tcs/harness/config.hpp"
#include "tcs/harness/ingest.hpp"
#include "tcs/harness/results_io.hpp"
#include "tcs/harness/runner.hpp"
#include "tcs/ndgrad/masking.hpp"
#include "tcs/simgen/dataset_io.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace tcs;
using namespace tcs::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
  const fs::path p = fs::temp_directory_path() / ("tcs_test_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path &p, const std::string &text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

RunConfig tiny_config() {
  RunConfig c = preset("desk");
  c.scenario.n = 60;
  c.scenario.d = 3;
  c.scenario.history = 2;
  c.scenario.followup = 4;
  c.scenario.replicates = 1;
  c.train.members = 2;
  c.train.hidden = 6;
  c.train.epochs = 1;
  c.train.batch = 16;
  c.train.workers = 1;
  c.train.propensity.epochs = 1;
  c.train.propensity.hidden = 4;
  c.adjust_propensity = c.train.propensity;
  return c;
}

} // namespace

TEST_CASE("sweep expansion is a cartesian product") {
  simgen::ScenarioConfig base;
  SweepSpec s;
  s.variance = {0.5, 1.0};
  s.eta = {0.7, 0.8, 0.9};
  const auto cells = expand_sweep(s, base, "default");
  REQUIRE(cells.size() == 6);
  std::set<std::string> names;
  for (const auto &c : cells) {
    names.insert(c.name);
    CHECK(c.config.d == base.d);
    CHECK(c.config.n == base.n);
  }
  CHECK(names.size() == 6);
  CHECK(cells[0].config.variance == 0.5);
  CHECK(cells[0].config.eta == 0.7);
  CHECK(cells[1].config.eta == 0.8);
  CHECK(cells[3].config.variance == 1.0);

  CHECK(expand_sweep(SweepSpec{}, base, "default").size() == 1);
  const SweepSpec full = paper_sweep();
  CHECK(expand_sweep(full, base, "x").size() == 4u * 4u * 4u * 3u);
  SweepSpec bad;
  bad.eta = {1.5};
  CHECK_THROWS_AS(expand_sweep(bad, base, "x"), ConfigError);
}

TEST_CASE("presets and named scenarios") {
  const RunConfig desk = preset("desk");
  CHECK(desk.scenario.n == 500);
  CHECK(desk.scenario.replicates == 5);
  CHECK(desk.train.members == 5);
  const RunConfig full = preset("paper");
  CHECK(full.scenario.n == 1500);
  CHECK(full.scenario.replicates == 50);
  CHECK(full.train.members == 20);
  CHECK_THROWS_AS(preset("huge"), ConfigError);

  CHECK(named_scenario("eta=1", desk.scenario).eta == 1.0);
  CHECK(named_scenario("D=10", desk.scenario).d == 10);
  CHECK(named_scenario("V=1.5", desk.scenario).variance == 1.5);
  CHECK(named_scenario("N=300", desk.scenario).n == 300);
  CHECK_THROWS_AS(named_scenario("zeta=1", desk.scenario), ConfigError);
  CHECK_THROWS_AS(named_scenario("eta=x", desk.scenario), ConfigError);
  CHECK_THROWS_AS(named_scenario("eta=2", desk.scenario), ConfigError);
}

TEST_CASE("estimator lists") {
  CHECK(parse_estimators("all") == kAllEstimators);
  CHECK(parse_estimators(" tcs, km ") == std::vector<std::string>{"tcs", "km"});
  CHECK_THROWS_AS(parse_estimators("tcs,foo"), ConfigError);
  CHECK_THROWS_AS(parse_estimators(" , "), ConfigError);
}

TEST_CASE("run configuration JSON round trip and partial override") {
  RunConfig c = preset("desk");
  c.scenario.eta = 0.8;
  c.estimators = {"tcs", "km"};
  c.sweep.d = {6, 10};
  nlohmann::json j = c;
  RunConfig back = preset("paper");
  merge_json(j, back);
  CHECK(nlohmann::json(back) == j);

  RunConfig partial = preset("desk");
  merge_json(nlohmann::json::parse(R"({"scenario": {"eta": 1.0}, "train": {"members": 3}})"),
             partial);
  CHECK(partial.scenario.eta == 1.0);
  CHECK(partial.scenario.n == 500);
  CHECK(partial.train.members == 3);
  CHECK(partial.train.hidden == preset("desk").train.hidden);
  CHECK_THROWS_AS(merge_json(nlohmann::json::parse(R"({"train": {"members": "x"}})"),
                             partial),
                  ConfigError);
}

TEST_CASE("replicate seeds are distinct and reproducible") {
  std::set<std::uint64_t> all;
  for (int r = 0; r < 20; ++r) {
    const ReplicateSeeds s = replicate_seeds(7, r);
    const ReplicateSeeds again = replicate_seeds(7, r);
    CHECK(s.train == again.train);
    CHECK(s.model == again.model);
    all.insert({s.train, s.test, s.model, s.adjust});
  }
  CHECK(all.size() == 80);
}

TEST_CASE("step status") {
  LongitudinalSample a = make_sample("a", 1, 4, 1);
  a.event_time = 2;
  a.censor_time = 4;
  LongitudinalSample b = make_sample("b", 1, 4, 1);
  b.event_time = 5;
  b.censor_time = 2;
  const StepStatus s = step_status({a, b});
  CHECK(s.event_by.row(0) == (Vector(4) << 0, 1, 1, 1).finished().transpose());
  CHECK(s.known.row(0) == Vector::Ones(4).transpose());
  CHECK(s.event_by.row(1) == Vector::Zero(4).transpose());
  CHECK(s.known.row(1) == (Vector(4) << 1, 1, 0, 0).finished().transpose());
}

TEST_CASE("ATE evaluation") {
  Vector est(2), truth(2);
  est << -0.2, 0.1;
  truth << -0.1, 0.0;
  const metrics::MetricReport r = evaluate_ate(est, truth);
  CHECK(r.bias_ate(0) == doctest::Approx(1.0));
  CHECK(std::isnan(r.bias_ate(1)));
  CHECK(r.bias_skipped[1] == 1);
  CHECK(r.mse(0) == doctest::Approx(0.01));
  CHECK(r.rmse(1) == doctest::Approx(0.1));
  CHECK(std::isnan(r.coverage(0)));
}

TEST_CASE("KM by arm needs both arms") {
  LongitudinalSample a = make_sample("a", 1, 2, 1);
  a.event_time = 3;
  a.censor_time = 2;
  a.treatment = {1, 1, 1};
  CHECK_THROWS_AS(km_by_arm({a, a}), DegenerateTreatmentError);
  LongitudinalSample b = a;
  b.treatment = {0, 0, 0};
  b.event_time = 1;
  const auto [s1, s0] = km_by_arm({a, b});
  CHECK(s1 == Vector::Ones(2));
  CHECK(s0 == Vector::Zero(2));
}

TEST_CASE("ingesting a generated dataset reproduces it") {
  const fs::path dir = scratch("ingest_roundtrip");
  simgen::ScenarioConfig c;
  c.n = 25;
  c.d = 3;
  c.history = 2;
  c.followup = 4;
  const simgen::Dataset d = simgen::generate(c, 12);
  simgen::write_dataset(dir / "data.csv", d.samples, 12, c);
  IngestSpec spec;
  spec.source = dir / "data.csv";
  spec.history = 2;
  spec.followup = 4;
  const IngestResult r = ingest_csv(spec);
  CHECK(r.covariates == std::vector<std::string>{"x_1", "x_2", "x_3"});
  CHECK(r.rows_skipped == 0);
  CHECK(r.rows_truncated == 0);
  REQUIRE(r.samples.size() == d.samples.size());
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    const auto &got = r.samples[i];
    const auto &want = d.samples[i];
    CHECK(got.id == want.id);
    CHECK(got.mask == want.mask);
    CHECK((got.x - want.x).cwiseAbs().maxCoeff() == 0.0);
    CHECK(got.treatment == want.treatment);
    CHECK(got.event_time == want.event_time);
    CHECK(got.censor_time == want.censor_time);
  }
}

TEST_CASE("ingest binning, masking and carry-forward") {
  const fs::path dir = scratch("ingest_bins");
  write_text(dir / "raw.csv", "id,time,x_1,a,event_time,censor_time\n"
                              "p,0,4,0,2,\n"
                              "p,1,6,0,,\n"
                              "p,4,1,1,,\n"
                              "p,abc,9,1,,\n"
                              "p,10,9,1,,\n"
                              "r,3,2,,,\n");
  IngestSpec spec;
  spec.source = dir / "raw.csv";
  spec.bin_width = 2.0;
  spec.history = 1;
  spec.followup = 2;
  const IngestResult res = ingest_csv(spec);
  CHECK(res.rows_read == 6);
  CHECK(res.rows_skipped == 1);
  CHECK(res.rows_truncated == 1);
  REQUIRE(res.samples.size() == 2);
  const LongitudinalSample &p = res.samples[0];
  CHECK(p.id == "p");
  CHECK(p.x(0, 0) == 5.0);
  CHECK(p.mask(0, 0) == 1);
  CHECK(p.mask(1, 0) == 0);
  CHECK(p.mask(2, 0) == 1);
  CHECK(p.x(2, 0) == 1.0);
  CHECK(p.treatment == std::vector<int>{0, 0, 1});
  CHECK(p.event_time == 2);
  CHECK(p.censor_time == 2);
  const Matrix delta = ndgrad::time_since_observed(p.mask);
  CHECK(delta(1, 0) == 1.0);
  CHECK(delta(2, 0) == 2.0);

  const LongitudinalSample &r = res.samples[1];
  CHECK(r.treatment == std::vector<int>{0, 0, 0});
  CHECK(r.event_time == 3);
  CHECK(r.mask(0, 0) == 1);
}

TEST_CASE("ingest names a missing column") {
  const fs::path dir = scratch("ingest_missing");
  write_text(dir / "raw.csv", "id,time,x_1\np,0,1\n");
  IngestSpec spec;
  spec.source = dir / "raw.csv";
  try {
    ingest_csv(spec);
    FAIL("expected an ingestion error");
  } catch (const IngestionError &e) {
    CHECK(std::string(e.what()).find("'a'") != std::string::npos);
  }
  spec.source = dir / "absent.csv";
  CHECK_THROWS_AS(ingest_csv(spec), IoError);
}

TEST_CASE("holdout and k-fold splits partition the subjects") {
  const SubjectSplit h = holdout_split(50, 0.2, 3);
  CHECK(h.test.size() == 10);
  CHECK(h.train.size() == 40);
  std::set<int> seen(h.train.begin(), h.train.end());
  seen.insert(h.test.begin(), h.test.end());
  CHECK(seen.size() == 50);
  CHECK(holdout_split(50, 0.2, 3).test == h.test);

  const auto folds = kfold_splits(23, 5, 4);
  REQUIRE(folds.size() == 5);
  std::vector<int> tested;
  for (const auto &f : folds) {
    CHECK(f.train.size() + f.test.size() == 23);
    std::set<int> tr(f.train.begin(), f.train.end());
    for (int t : f.test) {
      CHECK(tr.count(t) == 0);
      tested.push_back(t);
    }
  }
  std::sort(tested.begin(), tested.end());
  for (int i = 0; i < 23; ++i)
    CHECK(tested[static_cast<std::size_t>(i)] == i);
  CHECK_THROWS_AS(kfold_splits(3, 5, 1), UsageError);
  CHECK_THROWS_AS(kfold_splits(10, 1, 1), UsageError);
}

TEST_CASE("result files round trip") {
  const fs::path dir = scratch("results_io");
  write_metrics(dir / "empty.csv", {});
  CHECK(slurp(dir / "empty.csv").rfind("scenario,replicate,seed,estimator", 0) == 0);
  CHECK(read_metrics(dir / "empty.csv").empty());

  metrics::MetricReport r = metrics::MetricReport::empty(3);
  r.scenario = "eta=0.9";
  r.replicate = 2;
  r.seed = 99;
  r.estimator = "tcs";
  r.subgroup = "all";
  r.rmse << 0.1, 0.2, 1.0 / 3.0;
  r.bias_ite << 0.5, std::nan(""), 2.0;
  r.bias_skipped = {0, 4, 1};
  r.auroc_pooled = 0.75;
  write_metrics(dir / "m.csv", {r});
  const auto back = read_metrics(dir / "m.csv");
  REQUIRE(back.size() == 1);
  CHECK(back[0].scenario == r.scenario);
  CHECK(back[0].seed == 99);
  CHECK(back[0].rmse == r.rmse);
  CHECK(back[0].bias_ite(0) == 0.5);
  CHECK(std::isnan(back[0].bias_ite(1)));
  CHECK(back[0].bias_skipped == r.bias_skipped);
  CHECK(back[0].auroc_pooled == 0.75);

  EffectRow e{"s,1", 0, "tcs", "id\"7", 3, -0.1, -0.2, 0.0, 0.5, 0.6, -0.05, 1.1};
  write_effects(dir / "e.csv", {e});
  const auto eb = read_effects(dir / "e.csv");
  REQUIRE(eb.size() == 1);
  CHECK(eb[0].scenario == "s,1");
  CHECK(eb[0].id == "id\"7");
  CHECK(eb[0].ite == -0.1);
  CHECK(eb[0].hr_star == 1.1);

  try {
    read_metrics(dir / "nope.csv");
    FAIL("expected an io error");
  } catch (const IoError &err) {
    CHECK(std::string(err.what()).find("nope.csv") != std::string::npos);
  }
  write_text(dir / "bad.csv", "a,b\n1,2\n");
  CHECK_THROWS_AS(read_metrics(dir / "bad.csv"), DataError);
}

TEST_CASE("a tiny replicate runs every estimator and replays exactly") {
  const RunConfig c = tiny_config();
  const RunResult a = run_bench(c);
  std::set<std::string> seen;
  for (const auto &r : a.reports)
    seen.insert(r.estimator);
  for (const auto &f : a.failures) {
    CHECK(!f.category.empty());
    seen.insert(f.estimator);
  }
  for (const auto &name : kAllEstimators)
    CHECK(seen.count(name) == 1);
  REQUIRE(a.ledger.size() == 1);

  const fs::path d1 = scratch("replay_1"), d2 = scratch("replay_2");
  export_results(d1, c, a);
  const RunConfig replay = load_run_config(d1 / "config.json");
  CHECK(nlohmann::json(replay) == nlohmann::json(c));
  export_results(d2, replay, run_bench(replay));
  for (const char *f : {"metrics.csv", "effects.csv", "failures.csv", "config.json"})
    CHECK_MESSAGE(slurp(d1 / f) == slurp(d2 / f), f);
}
