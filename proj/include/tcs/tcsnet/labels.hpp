#pragma once

#include "tcs/sample.hpp"

#include <span>
#include <vector>

namespace tcs::tcsnet {

// Targets for one subject over follow-up steps 1..q (entry k-1 is step k).
struct LabelMatrix {
  Vector theta; // 1 while at risk (k < tau), 0 from tau on
  Vector gamma; // 1 at tau for an observed event, else 0
  int tau = 0;
  int event = 0; // 1 iff gamma has a 1

  int steps() const { return static_cast<int>(theta.size()); }
};

// Throws DataError when tau < 1 or tau > q + 1.
LabelMatrix build_labels(int tau, bool event, int q);
LabelMatrix build_labels(const LongitudinalSample &sample, int q);

// Row-stacked labels of the selected subjects (N x q each).
struct LabelBatch {
  Matrix theta;
  Matrix gamma;
  std::vector<int> tau;
  std::vector<int> event;

  int size() const { return static_cast<int>(tau.size()); }
};

LabelBatch stack_labels(const std::vector<LongitudinalSample> &samples,
                        std::span<const int> rows, int q);
LabelBatch stack_labels(const std::vector<LongitudinalSample> &samples, int q);

} // namespace tcs::tcsnet
