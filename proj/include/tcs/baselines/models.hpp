#pragma once

#include "tcs/tcsnet/ensemble.hpp"

namespace tcs::baselines {

// The survival network without the propensity column.
tcsnet::EnsembleModel train_snn(const std::vector<LongitudinalSample> &samples,
                                tcsnet::TrainConfig config);

// Single-head network regressing the Theta labels under squared error.
tcsnet::EnsembleModel train_binary(const std::vector<LongitudinalSample> &samples,
                                   tcsnet::TrainConfig config);

} // namespace tcs::baselines
