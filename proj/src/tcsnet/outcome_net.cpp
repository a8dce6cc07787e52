#include "tcs/tcsnet/outcome_net.hpp"

#include "tcs/error.hpp"

#include <algorithm>

namespace tcs::tcsnet {

using namespace ndgrad;

OutcomeNet::OutcomeNet(const std::string &name, const LambdaLayout &layout,
                       int hidden, HeadMode mode, Rng &rng)
    : encoder(name + "/encoder", layout.width(), hidden, rng),
      treated_hidden(name + "/treated/hidden", hidden, std::max(1, hidden / 2),
                     rng),
      treated_out(name + "/treated/out", std::max(1, hidden / 2), 1, rng),
      layout_(layout), mode_(mode) {
  if (mode == HeadMode::PotentialOutcomes) {
    control_hidden = Dense(name + "/control/hidden", hidden,
                           std::max(1, hidden / 2), rng);
    control_out = Dense(name + "/control/out", std::max(1, hidden / 2), 1, rng);
  }
}

std::vector<Parameter *> OutcomeNet::parameters() {
  std::vector<Parameter *> p = encoder.parameters();
  const auto append = [&p](Dense &d) {
    for (Parameter *x : d.parameters())
      p.push_back(x);
  };
  append(treated_hidden);
  append(treated_out);
  if (mode_ == HeadMode::PotentialOutcomes) {
    append(control_hidden);
    append(control_out);
  }
  return p;
}

std::vector<const Parameter *> OutcomeNet::parameters() const {
  auto *self = const_cast<OutcomeNet *>(this);
  const auto p = self->parameters();
  return {p.begin(), p.end()};
}

Matrix stack_time_major(const std::vector<const InputMatrix *> &batch) {
  if (batch.empty())
    throw StructuralError("outcome net: empty batch");
  const LambdaLayout &L = batch.front()->layout;
  const auto B = static_cast<Eigen::Index>(batch.size());
  const int q = L.followup;
  Matrix x(q * B, L.width());
  for (Eigen::Index b = 0; b < B; ++b) {
    const InputMatrix &m = *batch[static_cast<std::size_t>(b)];
    if (!(m.layout == L) || m.values.rows() != q || m.values.cols() != L.width())
      throw StructuralError("outcome net: inconsistent input layouts in batch");
    for (int t = 0; t < q; ++t)
      x.row(t * B + b) = m.values.row(t);
  }
  return x;
}

Tensor OutcomeNet::forward(Tape &tape,
                           const std::vector<const InputMatrix *> &batch) {
  const Matrix x = stack_time_major(batch);
  if (!(batch.front()->layout == layout_))
    throw StructuralError("outcome net: input layout does not match the net");
  const auto B = static_cast<Eigen::Index>(batch.size());
  const int q = layout_.followup;

  Tensor zx = encoder.project(tape, tape.constant(x));
  LstmCell::State st = encoder.initial_state(tape, B);
  std::vector<Tensor> hs;
  hs.reserve(static_cast<std::size_t>(q));
  for (int t = 0; t < q; ++t) {
    st = encoder.step_projected(tape, slice_rows(zx, t * B, B), st);
    hs.push_back(st.h);
  }
  Tensor h = concat_rows(hs);
  Tensor treated =
      sigmoid(treated_out.forward(tape, softplus(treated_hidden.forward(tape, h))));
  Tensor y = treated;
  if (mode_ == HeadMode::PotentialOutcomes) {
    Tensor control = sigmoid(
        control_out.forward(tape, softplus(control_hidden.forward(tape, h))));
    const Matrix a = x.col(layout_.a_col());
    y = add(mul_const(treated, a),
            mul_const(control, (1.0 - a.array()).matrix()));
  }
  return reshape(y, B, q);
}

Matrix OutcomeNet::predict(const std::vector<const InputMatrix *> &batch) {
  Matrix out(static_cast<Eigen::Index>(batch.size()), layout_.followup);
  constexpr std::size_t chunk = 256;
  for (std::size_t lo = 0; lo < batch.size(); lo += chunk) {
    const std::size_t hi = std::min(batch.size(), lo + chunk);
    std::vector<const InputMatrix *> part(batch.begin() + static_cast<long>(lo),
                                          batch.begin() + static_cast<long>(hi));
    Tape tape;
    out.middleRows(static_cast<Eigen::Index>(lo),
                   static_cast<Eigen::Index>(hi - lo)) =
        forward(tape, part).value();
  }
  return out;
}

Matrix OutcomeNet::predict(const std::vector<InputMatrix> &lambdas) {
  std::vector<const InputMatrix *> ptrs;
  ptrs.reserve(lambdas.size());
  for (const InputMatrix &m : lambdas)
    ptrs.push_back(&m);
  return predict(ptrs);
}

} // namespace tcs::tcsnet
