#pragma once

#include "tcs/tcsnet/labels.hpp"
#include "tcs/tcsnet/losses.hpp"
#include "tcs/tcsnet/outcome_net.hpp"
#include "tcs/tcsnet/propensity.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace tcs::tcsnet {

enum class ModelKind {
  Tcs,    // propensity column + potential-outcome heads, survival loss
  Snn,    // as Tcs without the propensity column
  Binary, // no propensity, single head, squared error on Theta
};

std::string kind_name(ModelKind k);
ModelKind parse_kind(const std::string &name);

struct TrainConfig {
  ModelKind kind = ModelKind::Tcs;
  int members = 20;
  int hidden = 64;
  int epochs = 30;
  int batch = 64;
  double lr = 1e-3;
  double clip = 5.0;
  double alpha = 1.0;
  double beta = 0.1;
  double temperature = 0.1;
  double subsample = 0.7;
  PropensityConfig propensity;
  std::uint64_t seed = 1;
  // 0 = TCS_WORKERS or the hardware thread count.
  int workers = 0;

  // Throws ConfigError.
  void validate() const;
};

void to_json(nlohmann::json &j, const TrainConfig &c);
void from_json(const nlohmann::json &j, TrainConfig &c);

struct Member {
  std::uint64_t seed = 0;
  std::optional<PropensityNet> propensity;
  OutcomeNet net;
  std::vector<double> epoch_loss;
};

struct EnsembleModel {
  TrainConfig config;
  LambdaLayout layout;
  Standardizer standardizer;
  std::vector<Member> members;

  ModelKind kind() const { return config.kind; }
  int size() const { return static_cast<int>(members.size()); }
};

// Seed of member m.
std::uint64_t member_seed(std::uint64_t base, int m);

// Input matrix of one sample as seen by a member.
InputMatrix member_lambda(const Member &member, const Standardizer &standardizer,
                          const LongitudinalSample &sample);

// Training objective of one batch: alpha L1 / B + beta L2 / max(1, pairs) for
// survival kinds, squared error / (B q) against Theta for Binary. labels and
// pairs must outlive the backward pass.
ndgrad::Tensor batch_objective(ndgrad::Tape &tape, OutcomeNet &net,
                               const std::vector<const InputMatrix *> &batch,
                               const LabelBatch &labels,
                               const std::vector<RankPair> &pairs,
                               const TrainConfig &config);

// One member from its seed. Throws TrainingError naming the seed when the loss
// or a gradient becomes non-finite.
Member train_member(const std::vector<LongitudinalSample> &samples,
                    const TrainConfig &config, const Standardizer &standardizer,
                    std::uint64_t seed);

// K members trained independently, in parallel across workers.
EnsembleModel train_ensemble(const std::vector<LongitudinalSample> &samples,
                             const TrainConfig &config);

// Worker count from the config, the TCS_WORKERS variable, or the hardware.
int resolve_workers(int requested);

} // namespace tcs::tcsnet
