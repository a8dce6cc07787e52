#pragma once

#include "tcs/ndgrad/layers.hpp"
#include "tcs/tcsnet/lambda.hpp"

#include <string>
#include <vector>

namespace tcs::tcsnet {

enum class HeadMode {
  PotentialOutcomes, // treatment and control heads selected by the row's a
  Single,            // one head; a is an ordinary input
};

// Recurrent encoder over the rows of Lambda followed by dense heads
// Dense(H -> H/2) -> softplus -> Dense(-> 1) -> sigmoid. Output (b, t) is the
// prediction for follow-up step t + 1 of batch entry b.
class OutcomeNet {
public:
  OutcomeNet() = default;
  OutcomeNet(const std::string &name, const LambdaLayout &layout, int hidden,
             HeadMode mode, Rng &rng);

  // B x q in (0, 1). Throws StructuralError on a layout mismatch.
  ndgrad::Tensor forward(ndgrad::Tape &tape,
                         const std::vector<const InputMatrix *> &batch);
  Matrix predict(const std::vector<const InputMatrix *> &batch);
  Matrix predict(const std::vector<InputMatrix> &lambdas);

  std::vector<ndgrad::Parameter *> parameters();
  std::vector<const ndgrad::Parameter *> parameters() const;
  const LambdaLayout &layout() const { return layout_; }
  HeadMode mode() const { return mode_; }
  int hidden() const { return encoder.hidden(); }

  ndgrad::LstmCell encoder;
  ndgrad::Dense treated_hidden, treated_out;
  ndgrad::Dense control_hidden, control_out; // unused in Single mode

private:
  LambdaLayout layout_;
  HeadMode mode_ = HeadMode::PotentialOutcomes;
};

// Rows of the batch stacked time-major: row t * B + b is row t of entry b.
Matrix stack_time_major(const std::vector<const InputMatrix *> &batch);

} // namespace tcs::tcsnet
