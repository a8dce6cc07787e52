#include "tcs/baselines/models.hpp"

namespace tcs::baselines {

tcsnet::EnsembleModel train_snn(const std::vector<LongitudinalSample> &samples,
                                tcsnet::TrainConfig config) {
  config.kind = tcsnet::ModelKind::Snn;
  return tcsnet::train_ensemble(samples, config);
}

tcsnet::EnsembleModel train_binary(const std::vector<LongitudinalSample> &samples,
                                   tcsnet::TrainConfig config) {
  config.kind = tcsnet::ModelKind::Binary;
  return tcsnet::train_ensemble(samples, config);
}

} // namespace tcs::baselines
