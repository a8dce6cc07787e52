#include "tcs/tcsnet/ensemble.hpp"

#include "tcs/error.hpp"
#include "tcs/ndgrad/ops.hpp"
#include "tcs/ndgrad/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numeric>
#include <thread>

namespace tcs::tcsnet {

using namespace ndgrad;

std::string kind_name(ModelKind k) {
  switch (k) {
  case ModelKind::Tcs:
    return "tcs";
  case ModelKind::Snn:
    return "snn";
  case ModelKind::Binary:
    return "binary";
  }
  return "tcs";
}

ModelKind parse_kind(const std::string &name) {
  if (name == "tcs")
    return ModelKind::Tcs;
  if (name == "snn")
    return ModelKind::Snn;
  if (name == "binary")
    return ModelKind::Binary;
  throw ConfigError("unknown model kind '" + name + "'");
}

void TrainConfig::validate() const {
  if (members < 2)
    throw ConfigError("ensemble needs at least 2 members (members >= 2)");
  if (hidden < 1)
    throw ConfigError("hidden size must be >= 1");
  if (epochs < 1)
    throw ConfigError("epochs must be >= 1");
  if (batch < 1)
    throw ConfigError("batch size must be >= 1");
  if (!(lr > 0.0))
    throw ConfigError("learning rate must be > 0");
  if (!(clip > 0.0))
    throw ConfigError("gradient clip must be > 0");
  if (alpha < 0.0 || beta < 0.0 || (alpha == 0.0 && beta == 0.0))
    throw ConfigError("loss weights need alpha, beta >= 0, not both 0");
  if (!(temperature > 0.0))
    throw ConfigError("rank loss temperature must be > 0");
  if (!(subsample > 0.0 && subsample <= 1.0))
    throw ConfigError("subsample fraction must lie in (0, 1]");
  if (workers < 0)
    throw ConfigError("workers must be >= 0");
  if (kind == ModelKind::Tcs)
    propensity.validate();
}

void to_json(nlohmann::json &j, const TrainConfig &c) {
  j = {{"kind", kind_name(c.kind)},
       {"members", c.members},
       {"hidden", c.hidden},
       {"epochs", c.epochs},
       {"batch", c.batch},
       {"lr", c.lr},
       {"clip", c.clip},
       {"alpha", c.alpha},
       {"beta", c.beta},
       {"temperature", c.temperature},
       {"subsample", c.subsample},
       {"propensity", c.propensity},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json &j, TrainConfig &c) {
  const TrainConfig d;
  c.kind = parse_kind(j.value("kind", kind_name(d.kind)));
  c.members = j.value("members", d.members);
  c.hidden = j.value("hidden", d.hidden);
  c.epochs = j.value("epochs", d.epochs);
  c.batch = j.value("batch", d.batch);
  c.lr = j.value("lr", d.lr);
  c.clip = j.value("clip", d.clip);
  c.alpha = j.value("alpha", d.alpha);
  c.beta = j.value("beta", d.beta);
  c.temperature = j.value("temperature", d.temperature);
  c.subsample = j.value("subsample", d.subsample);
  c.propensity = j.value("propensity", d.propensity);
  c.seed = j.value("seed", d.seed);
}

std::uint64_t member_seed(std::uint64_t base, int m) {
  return derive_seed(base, static_cast<std::uint64_t>(m), 0x6d656d62ULL);
}

InputMatrix member_lambda(const Member &member, const Standardizer &standardizer,
                          const LongitudinalSample &sample) {
  if (member.propensity) {
    auto &prop = const_cast<PropensityNet &>(*member.propensity);
    const std::vector<double> trace = prop.followup_trace(sample);
    return assemble_lambda(sample, trace, standardizer);
  }
  return assemble_lambda(sample, standardizer);
}

Tensor batch_objective(Tape &tape, OutcomeNet &net,
                       const std::vector<const InputMatrix *> &batch,
                       const LabelBatch &labels,
                       const std::vector<RankPair> &pairs,
                       const TrainConfig &config) {
  Tensor out = net.forward(tape, batch);
  const double B = static_cast<double>(batch.size());
  if (config.kind == ModelKind::Binary)
    return affine(squared_error(out, labels.theta),
                  1.0 / (B * static_cast<double>(out.cols())), 0.0);
  Tensor loss = affine(loss_l1(out, labels), config.alpha / B, 0.0);
  if (config.beta > 0.0 && !pairs.empty()) {
    const double np = static_cast<double>(pairs.size());
    loss = add(loss, affine(loss_l2(out, pairs, config.temperature),
                            config.beta / np, 0.0));
  }
  return loss;
}

namespace {

Member train_member_impl(const std::vector<LongitudinalSample> &samples,
                         const TrainConfig &config,
                         const Standardizer &standardizer, std::uint64_t seed) {
  const LongitudinalSample &first = samples.front();
  const int q = first.followup;
  Member member;
  member.seed = seed;
  if (config.kind == ModelKind::Tcs)
    member.propensity = fit_propensity(samples, standardizer, config.propensity,
                                       derive_seed(seed, 1));

  std::vector<InputMatrix> lambdas;
  lambdas.reserve(samples.size());
  for (const LongitudinalSample &s : samples)
    lambdas.push_back(member_lambda(member, standardizer, s));
  const LambdaLayout layout = lambdas.front().layout;

  Rng init_rng(derive_seed(seed, 2));
  member.net = OutcomeNet("outcome", layout, config.hidden,
                          config.kind == ModelKind::Binary
                              ? HeadMode::Single
                              : HeadMode::PotentialOutcomes,
                          init_rng);
  const std::vector<Parameter *> params = member.net.parameters();
  Adam adam(params, AdamConfig{config.lr});

  Rng rng(derive_seed(seed, 3));
  std::vector<int> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  const auto take = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::lround(config.subsample * static_cast<double>(samples.size()))));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    int batches = 0;
    for (std::size_t lo = 0; lo < take; lo += static_cast<std::size_t>(config.batch)) {
      const std::size_t hi =
          std::min(take, lo + static_cast<std::size_t>(config.batch));
      const std::vector<int> rows(order.begin() + static_cast<long>(lo),
                                  order.begin() + static_cast<long>(hi));
      std::vector<const InputMatrix *> batch;
      for (int r : rows)
        batch.push_back(&lambdas[static_cast<std::size_t>(r)]);
      const LabelBatch labels = stack_labels(samples, rows, q);
      const std::vector<RankPair> pairs =
          config.kind == ModelKind::Binary ? std::vector<RankPair>{}
                                           : rank_pairs(labels);
      Tape tape;
      Tensor loss = batch_objective(tape, member.net, batch, labels, pairs, config);
      const double value = loss.value()(0, 0);
      if (!std::isfinite(value))
        throw NumericalError("non-finite training loss");
      zero_grads(params);
      tape.backward(loss);
      clip_grad_norm(params, config.clip);
      adam.step();
      total += value;
      ++batches;
    }
    member.epoch_loss.push_back(total / batches);
  }
  return member;
}

} // namespace

Member train_member(const std::vector<LongitudinalSample> &samples,
                    const TrainConfig &config, const Standardizer &standardizer,
                    std::uint64_t seed) {
  if (samples.empty())
    throw DataError("cannot train on an empty sample");
  try {
    return train_member_impl(samples, config, standardizer, seed);
  } catch (const NumericalError &e) {
    throw TrainingError("member with seed " + std::to_string(seed) +
                        " diverged: " + e.what());
  }
}

int resolve_workers(int requested) {
  if (requested > 0)
    return requested;
  if (const char *env = std::getenv("TCS_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0)
      return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

EnsembleModel train_ensemble(const std::vector<LongitudinalSample> &samples,
                             const TrainConfig &config) {
  config.validate();
  if (samples.empty())
    throw DataError("cannot train on an empty sample");
  EnsembleModel model;
  model.config = config;
  model.standardizer = Standardizer::fit(samples);
  const LongitudinalSample &first = samples.front();
  model.layout = LambdaLayout{first.history, first.followup, first.dims(),
                              config.kind == ModelKind::Tcs};

  const int K = config.members;
  std::vector<std::optional<Member>> slots(static_cast<std::size_t>(K));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(K));
  std::atomic<int> next{0};
  const auto work = [&] {
    for (int m = next++; m < K; m = next++) {
      try {
        slots[static_cast<std::size_t>(m)] = train_member(
            samples, config, model.standardizer, member_seed(config.seed, m));
      } catch (...) {
        errors[static_cast<std::size_t>(m)] = std::current_exception();
      }
    }
  };
  const int workers = std::min(resolve_workers(config.workers), K);
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
  for (auto &slot : slots)
    model.members.push_back(std::move(*slot));
  return model;
}

} // namespace tcs::tcsnet
