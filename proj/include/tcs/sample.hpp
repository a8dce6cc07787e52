#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace tcs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MaskMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Time conventions used throughout the library.
//
// A panel covers the grid s = 1..(u+q). Steps s <= u form the history window,
// steps s > u the follow-up window. Follow-up step k = 1..q sits at grid step
// s = u + k and corresponds to the prediction row t = k - 1 of the input
// matrix. Event and censor times are follow-up step indices.
struct LongitudinalSample {
  std::string id;
  int history = 0;  // u
  int followup = 0; // q
  Matrix x;         // (u+q) x D; row s-1 holds grid step s
  MaskMatrix mask;  // (u+q) x D; 1 = observed
  std::vector<int> treatment; // length u+q, binary
  int event_time = 0;  // tau_s in 1..q+1 (q+1 = never)
  int censor_time = 0; // tau_c in 1..q (q = administrative end)

  int steps() const { return history + followup; }
  int dims() const { return static_cast<int>(x.cols()); }
  int tau() const { return event_time < censor_time ? event_time : censor_time; }
  // Y = 1 iff the event happens no later than censoring.
  bool event() const { return event_time <= censor_time; }
  // Grid step (1-based) of follow-up step k.
  int grid_step(int k) const { return history + k; }
  // Treatment at follow-up step k.
  int followup_treatment(int k) const { return treatment[history + k - 1]; }

  // Throws DataError when shapes or time fields are inconsistent.
  void validate() const;
};

// A fully observed sample of the given shape, zero covariates.
LongitudinalSample make_sample(std::string id, int history, int followup,
                               int dims);

} // namespace tcs
