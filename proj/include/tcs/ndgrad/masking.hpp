#pragma once

#include "tcs/sample.hpp"

#include <vector>

namespace tcs::ndgrad {

// Masked representation of a panel window: missingness mask, steps since the
// last observation, zero-filled covariates and treatments.
struct MaskedSequence {
  int first_step = 0; // grid step of row 0
  MaskMatrix mask;    // T x D
  Matrix delta;       // T x D
  Matrix x;           // T x D, zero where mask == 0
  std::vector<int> treatment;

  int length() const { return static_cast<int>(mask.rows()); }
  // Concatenated [M | delta | X | A] feature matrix, T x (3D + 1).
  Matrix features() const;
};

// delta(t, d) = t - (last row < t where d was observed), or t when d was never
// observed before row t. Row 0 is always 0.
Matrix time_since_observed(const MaskMatrix &mask);

// Window [first_step, last_step] in 1-based grid steps, inclusive. Throws
// UsageError on an empty window and StructuralError when it leaves the panel.
MaskedSequence mask_transform(const LongitudinalSample &sample, int first_step,
                              int last_step);

} // namespace tcs::ndgrad
