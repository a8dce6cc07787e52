#include "tcs/harness/runner.hpp"

#include "tcs/baselines/adjust.hpp"
#include "tcs/baselines/kaplan_meier.hpp"
#include "tcs/baselines/models.hpp"
#include "tcs/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <thread>

namespace tcs::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool wants(const RunConfig &c, const std::string &name) {
  return std::find(c.estimators.begin(), c.estimators.end(), name) !=
         c.estimators.end();
}

bool wants_prefix(const RunConfig &c, const std::string &prefix) {
  return std::any_of(c.estimators.begin(), c.estimators.end(),
                     [&](const std::string &e) { return e.rfind(prefix, 0) == 0; });
}

Matrix as_row(const Vector &v) { return v.transpose(); }

template <class F> double or_nan(F &&f) {
  try {
    return f();
  } catch (const UndefinedMetricError &) {
    return kNaN;
  }
}

} // namespace

void RunResult::append(RunResult &&other) {
  for (auto &r : other.reports)
    reports.push_back(std::move(r));
  for (auto &r : other.effects)
    effects.push_back(std::move(r));
  for (auto &r : other.failures)
    failures.push_back(std::move(r));
  for (auto &r : other.ledger)
    ledger.push_back(std::move(r));
}

ReplicateSeeds replicate_seeds(std::uint64_t base, int replicate) {
  const auto r = static_cast<std::uint64_t>(replicate);
  return {derive_seed(base, r, 1), derive_seed(base, r, 2),
          derive_seed(base, r, 3), derive_seed(base, r, 4)};
}

StepStatus step_status(const std::vector<LongitudinalSample> &samples) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  const int q = samples.empty() ? 0 : samples.front().followup;
  StepStatus s{Matrix::Zero(n, q), Matrix::Zero(n, q)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const LongitudinalSample &x = samples[static_cast<std::size_t>(i)];
    for (int k = 1; k <= q; ++k) {
      const bool happened = x.event() && x.tau() <= k;
      s.event_by(i, k - 1) = happened ? 1.0 : 0.0;
      s.known(i, k - 1) = (happened || x.tau() >= k) ? 1.0 : 0.0;
    }
  }
  return s;
}

Matrix followup_treatment(const std::vector<LongitudinalSample> &samples) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  const int q = samples.empty() ? 0 : samples.front().followup;
  Matrix a(n, q);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int k = 1; k <= q; ++k)
      a(i, k - 1) = samples[static_cast<std::size_t>(i)].followup_treatment(k);
  return a;
}

void fill_discrimination(metrics::MetricReport &report, const Matrix &survival,
                         const std::vector<LongitudinalSample> &samples) {
  const StepStatus st = step_status(samples);
  std::vector<int> tau, event;
  for (const LongitudinalSample &s : samples) {
    tau.push_back(s.tau());
    event.push_back(s.event() ? 1 : 0);
  }
  std::vector<double> pooled_scores;
  std::vector<int> pooled_labels;
  for (Eigen::Index t = 0; t < survival.cols(); ++t) {
    std::vector<double> risk(samples.size());
    std::vector<double> scores;
    std::vector<int> labels;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      risk[i] = 1.0 - survival(r, t);
      if (st.known(r, t) > 0.5) {
        scores.push_back(risk[i]);
        labels.push_back(st.event_by(r, t) > 0.5 ? 1 : 0);
      }
    }
    report.concordance(t) =
        or_nan([&] { return metrics::concordance(risk, tau, event); });
    report.auroc(t) = or_nan([&] { return metrics::auroc(scores, labels); });
    pooled_scores.insert(pooled_scores.end(), scores.begin(), scores.end());
    pooled_labels.insert(pooled_labels.end(), labels.begin(), labels.end());
  }
  report.auroc_pooled =
      or_nan([&] { return metrics::auroc(pooled_scores, pooled_labels); });
}

metrics::MetricReport evaluate_ite(const tcsnet::EffectEstimate &estimate,
                                   const simgen::GroundTruth &truth,
                                   const std::vector<LongitudinalSample> &samples) {
  const int q = static_cast<int>(estimate.ite.cols());
  metrics::MetricReport r = metrics::MetricReport::empty(q);
  r.mse = metrics::mse(estimate.ite, truth.ite);
  r.rmse = r.mse.array().sqrt().matrix();
  try {
    const metrics::BiasResult b = metrics::bias(estimate.ite, truth.ite);
    r.bias_ite = b.per_time;
    r.bias_skipped = b.skipped;
  } catch (const UndefinedMetricError &) {
  }
  try {
    r.bias_ate = metrics::bias(as_row(estimate.cate), as_row(truth.ate())).per_time;
  } catch (const UndefinedMetricError &) {
  }
  r.coverage = metrics::coverage(estimate.ite_lo, estimate.ite_hi, truth.ite);
  fill_discrimination(r, estimate.survival_obs, samples);
  return r;
}

metrics::MetricReport evaluate_ate(const Vector &ate, const Vector &true_ate) {
  const int q = static_cast<int>(ate.size());
  metrics::MetricReport r = metrics::MetricReport::empty(q);
  r.mse = metrics::mse(as_row(ate), as_row(true_ate));
  r.rmse = r.mse.array().sqrt().matrix();
  try {
    const metrics::BiasResult b = metrics::bias(as_row(ate), as_row(true_ate));
    r.bias_ate = b.per_time;
    r.bias_skipped = b.skipped;
  } catch (const UndefinedMetricError &) {
  }
  return r;
}

std::pair<Vector, Vector> km_by_arm(const std::vector<LongitudinalSample> &samples) {
  std::vector<LongitudinalSample> treated, control;
  for (const LongitudinalSample &s : samples)
    (s.followup_treatment(1) ? treated : control).push_back(s);
  if (treated.empty() || control.empty())
    throw DegenerateTreatmentError(
        "km: every subject is in one arm at the first follow-up step");
  return {baselines::kaplan_meier(treated), baselines::kaplan_meier(control)};
}

namespace {

struct Context {
  const RunConfig &config;
  const std::string &scenario;
  int replicate;
  std::uint64_t seed;
  const std::vector<LongitudinalSample> &test;
  const simgen::GroundTruth &truth;
  RunResult &out;

  void report(metrics::MetricReport r, const std::string &estimator) {
    r.scenario = scenario;
    r.replicate = replicate;
    r.seed = seed;
    r.estimator = estimator;
    out.reports.push_back(std::move(r));
  }

  void fail(const std::string &estimator, const std::exception &e) {
    const auto *err = dynamic_cast<const Error *>(&e);
    out.failures.push_back({scenario, replicate, estimator,
                            err ? category_name(err->category()) : "internal",
                            e.what()});
  }

  void ate_rows(const std::string &estimator, const Vector &ate, const Vector &lo,
                const Vector &hi, const Vector &s1, const Vector &s0,
                const Vector &hr) {
    const Vector true_ate = truth.ate();
    for (Eigen::Index t = 0; t < ate.size(); ++t)
      out.effects.push_back({scenario, replicate, estimator, kAteRowId,
                             static_cast<int>(t + 1), ate(t), lo(t), hi(t), s1(t),
                             s0(t), true_ate(t), hr(t)});
  }

  void subject_rows(const std::string &estimator, const tcsnet::EffectEstimate &e) {
    for (Eigen::Index i = 0; i < e.ite.rows(); ++i) {
      const int row = e.rows[static_cast<std::size_t>(i)];
      for (Eigen::Index t = 0; t < e.ite.cols(); ++t)
        out.effects.push_back({scenario, replicate, estimator,
                               e.ids[static_cast<std::size_t>(i)],
                               static_cast<int>(t + 1), e.ite(i, t), e.ite_lo(i, t),
                               e.ite_hi(i, t), e.survival_1(i, t),
                               e.survival_0(i, t), truth.ite(row, t), kNaN});
    }
    ate_rows(estimator, e.cate, e.cate_lo, e.cate_hi,
             e.survival_1.colwise().mean().transpose(),
             e.survival_0.colwise().mean().transpose(), e.hr_star);
  }
};

std::vector<std::uint64_t> member_seeds(const tcsnet::EnsembleModel &m) {
  std::vector<std::uint64_t> s;
  for (const tcsnet::Member &mem : m.members)
    s.push_back(mem.seed);
  return s;
}

tcsnet::TrainConfig model_config(const RunConfig &c, std::uint64_t model_seed,
                                 tcsnet::ModelKind kind, int member_workers) {
  tcsnet::TrainConfig t = c.train;
  t.kind = kind;
  t.seed = derive_seed(model_seed, static_cast<std::uint64_t>(kind));
  t.workers = member_workers;
  return t;
}

// Raw ITE evaluation plus the IPW / TMLE adjustments of one baseline model.
void evaluate_baseline(Context &ctx, const std::string &prefix,
                       const tcsnet::EnsembleModel &model,
                       const std::optional<Matrix> &propensity,
                       const std::string &propensity_error) {
  const tcsnet::EffectEstimate e = tcsnet::estimate_effects(model, ctx.test);
  if (wants(ctx.config, prefix + "_raw")) {
    ctx.report(evaluate_ite(e, ctx.truth, ctx.test), prefix + "_raw");
    ctx.subject_rows(prefix + "_raw", e);
  }
  const bool ipw = wants(ctx.config, prefix + "_ipw");
  const bool tmle = wants(ctx.config, prefix + "_tmle");
  if (!ipw && !tmle)
    return;
  if (!propensity) {
    const DegenerateTreatmentError err(propensity_error);
    if (ipw)
      ctx.fail(prefix + "_ipw", err);
    if (tmle)
      ctx.fail(prefix + "_tmle", err);
    return;
  }
  const StepStatus st = step_status(ctx.test);
  baselines::TmleInput in{e.survival_1,
                          e.survival_0,
                          (1.0 - st.event_by.array()).matrix(),
                          st.known,
                          followup_treatment(ctx.test),
                          *propensity};
  const Vector true_ate = ctx.truth.ate();
  const auto q = static_cast<Eigen::Index>(true_ate.size());
  const Vector none = Vector::Constant(q, kNaN);
  if (ipw) {
    try {
      Matrix y_arm(in.y1.rows(), q);
      for (Eigen::Index i = 0; i < y_arm.rows(); ++i)
        for (Eigen::Index t = 0; t < q; ++t)
          y_arm(i, t) = in.treatment(i, t) > 0.5 ? in.y1(i, t) : in.y0(i, t);
      const Vector psi = baselines::ipw_adjust(y_arm, in.treatment, in.propensity);
      ctx.report(evaluate_ate(psi, true_ate), prefix + "_ipw");
      ctx.ate_rows(prefix + "_ipw", psi, none, none, none, none, none);
    } catch (const Error &err) {
      ctx.fail(prefix + "_ipw", err);
    }
  }
  if (tmle) {
    try {
      const baselines::AdjustedATE adj = baselines::tmle_adjust(in);
      ctx.report(evaluate_ate(adj.psi_tmle, true_ate), prefix + "_tmle");
      ctx.ate_rows(prefix + "_tmle", adj.psi_tmle, none, none, none, none, none);
    } catch (const Error &err) {
      ctx.fail(prefix + "_tmle", err);
    }
  }
}

} // namespace

namespace {

RunResult replicate_impl(const RunConfig &config, const std::string &scenario_name,
                         const simgen::ScenarioConfig &scenario, int replicate,
                         int member_workers) {
  const ReplicateSeeds seeds = replicate_seeds(scenario.seed, replicate);
  const simgen::Dataset train = simgen::generate(scenario, seeds.train);
  const simgen::Dataset test = simgen::generate(scenario, seeds.test);
  RunResult out;
  SeedRecord ledger{scenario_name, replicate, seeds, {}};
  Context ctx{config, scenario_name, replicate, seeds.test,
              test.samples, *test.truth, out};

  if (wants(config, "tcs")) {
    try {
      const auto model = tcsnet::train_ensemble(
          train.samples,
          model_config(config, seeds.model, tcsnet::ModelKind::Tcs, member_workers));
      ledger.members["tcs"] = member_seeds(model);
      const tcsnet::EffectEstimate e = tcsnet::estimate_effects(model, test.samples);
      ctx.report(evaluate_ite(e, *test.truth, test.samples), "tcs");
      ctx.subject_rows("tcs", e);
    } catch (const std::exception &e) {
      ctx.fail("tcs", e);
    }
  }

  std::optional<Matrix> propensity;
  std::string propensity_error;
  const bool adjusted = wants(config, "snn_ipw") || wants(config, "snn_tmle") ||
                        wants(config, "binary_ipw") || wants(config, "binary_tmle");
  if (adjusted) {
    try {
      auto net = tcsnet::fit_propensity(
          train.samples, tcsnet::Standardizer::fit(train.samples),
          config.adjust_propensity, seeds.adjust);
      const Matrix p = net.predict(test.samples);
      // Column k - 1 holds P(A = 1) at grid step u + k.
      propensity = p.middleCols(scenario.history, scenario.followup);
    } catch (const Error &e) {
      propensity_error = e.what();
    }
  }

  for (const auto &[prefix, kind] :
       {std::pair{std::string("snn"), tcsnet::ModelKind::Snn},
        std::pair{std::string("binary"), tcsnet::ModelKind::Binary}}) {
    if (!wants_prefix(config, prefix + "_"))
      continue;
    try {
      const auto model = tcsnet::train_ensemble(
          train.samples, model_config(config, seeds.model, kind, member_workers));
      ledger.members[prefix] = member_seeds(model);
      evaluate_baseline(ctx, prefix, model, propensity, propensity_error);
    } catch (const std::exception &e) {
      for (const char *suffix : {"_raw", "_ipw", "_tmle"})
        if (wants(config, prefix + suffix))
          ctx.fail(prefix + suffix, e);
    }
  }

  if (wants(config, "km")) {
    try {
      const auto [s1, s0] = km_by_arm(test.samples);
      const Vector ate = s1 - s0;
      ctx.report(evaluate_ate(ate, test.truth->ate()), "km");
      const Vector none = Vector::Constant(ate.size(), kNaN);
      ctx.ate_rows("km", ate, none, none, s1, s0, none);
    } catch (const std::exception &e) {
      ctx.fail("km", e);
    }
  }
  out.ledger.push_back(std::move(ledger));
  return out;
}

} // namespace

RunResult run_replicate(const RunConfig &config, const std::string &scenario_name,
                        const simgen::ScenarioConfig &scenario, int replicate) {
  return replicate_impl(config, scenario_name, scenario, replicate,
                        config.train.workers);
}

RunResult run_scenario(const RunConfig &config, const std::string &scenario_name,
                       const simgen::ScenarioConfig &scenario) {
  scenario.validate();
  const int R = scenario.replicates;
  const int workers = std::min(tcsnet::resolve_workers(config.train.workers), R);
  // Parallelism goes to replicates when there are enough of them, otherwise
  // to ensemble members.
  const int member_workers = workers > 1 ? 1 : config.train.workers;
  std::vector<RunResult> slots(static_cast<std::size_t>(R));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(R));
  std::atomic<int> next{0};
  const auto work = [&] {
    for (int r = next++; r < R; r = next++) {
      try {
        slots[static_cast<std::size_t>(r)] =
            replicate_impl(config, scenario_name, scenario, r, member_workers);
      } catch (...) {
        errors[static_cast<std::size_t>(r)] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back(work);
    for (std::thread &t : pool)
      t.join();
  }
  for (const std::exception_ptr &e : errors)
    if (e)
      std::rethrow_exception(e);
  RunResult out;
  for (RunResult &r : slots)
    out.append(std::move(r));
  return out;
}

RunResult run_bench(const RunConfig &config) {
  config.validate();
  RunResult out;
  for (const SweepCell &cell :
       expand_sweep(config.sweep, config.scenario, config.scenario_name))
    out.append(run_scenario(config, cell.name, cell.config));
  return out;
}

} // namespace tcs::harness
