#pragma once

#include "tcs/tcsnet/ensemble.hpp"

#include <filesystem>

namespace tcs::tcsnet {

// One checkpoint holding every member. Tensor names are prefixed "m<k>/";
// the header meta carries the training config, layout, standardizer, member
// seeds and network sizes.
void save_ensemble(const std::filesystem::path &path, const EnsembleModel &model);
EnsembleModel load_ensemble(const std::filesystem::path &path);

} // namespace tcs::tcsnet
