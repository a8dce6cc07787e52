#pragma once

#include "tcs/ndgrad/layers.hpp"
#include "tcs/tcsnet/lambda.hpp"

#include <json.hpp>

#include <vector>

namespace tcs::tcsnet {

struct PropensityConfig {
  int hidden = 32;
  int epochs = 30;
  int batch = 64;
  double lr = 5e-3;
  double clip = 5.0;

  // Throws ConfigError.
  void validate() const;
};

void to_json(nlohmann::json &j, const PropensityConfig &c);
void from_json(const nlohmann::json &j, PropensityConfig &c);

// Recurrent treatment model: at grid step s it reads the masked covariate
// history [M | delta | X] up to s and outputs P(A(s) = 1).
class PropensityNet {
public:
  PropensityNet() = default;
  PropensityNet(const std::string &name, int dims, int steps, int hidden,
                Standardizer standardizer, Rng &rng);

  // B x steps logits.
  ndgrad::Tensor logits(ndgrad::Tape &tape,
                        const std::vector<const LongitudinalSample *> &batch);
  // P(A(s) = 1) for s = 1..steps, one row per sample.
  Matrix predict(const std::vector<LongitudinalSample> &samples);
  // p(s) at s = u + t for t = 0..q-1, the column that fills row t of Lambda.
  std::vector<double> followup_trace(const LongitudinalSample &sample);

  std::vector<ndgrad::Parameter *> parameters();
  std::vector<const ndgrad::Parameter *> parameters() const;
  int dims() const { return dims_; }
  int steps() const { return steps_; }
  int hidden() const { return cell.hidden(); }
  const Standardizer &standardizer() const { return standardizer_; }

  ndgrad::LstmCell cell;
  ndgrad::Dense out;

private:
  int dims_ = 0;
  int steps_ = 0;
  Standardizer standardizer_;
};

// Per-step masked features [M | delta / steps | X] of one grid step, B x 3D.
Matrix propensity_features(const std::vector<const LongitudinalSample *> &batch,
                           int step, const Standardizer &standardizer);

// Trains by binary cross-entropy on every observed A(s). Throws
// DegenerateTreatmentError unless both treatment values occur and there are at
// least two subjects.
PropensityNet fit_propensity(const std::vector<LongitudinalSample> &samples,
                             const Standardizer &standardizer,
                             const PropensityConfig &config, std::uint64_t seed);

} // namespace tcs::tcsnet
