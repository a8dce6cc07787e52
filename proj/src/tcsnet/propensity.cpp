#include "tcs/tcsnet/propensity.hpp"

#include "tcs/error.hpp"
#include "tcs/ndgrad/optimizer.hpp"
#include "tcs/tcsnet/losses.hpp"

#include <algorithm>
#include <numeric>

namespace tcs::tcsnet {

using namespace ndgrad;

void PropensityConfig::validate() const {
  if (hidden < 1)
    throw ConfigError("propensity hidden size must be >= 1");
  if (epochs < 1)
    throw ConfigError("propensity epochs must be >= 1");
  if (batch < 1)
    throw ConfigError("propensity batch size must be >= 1");
  if (!(lr > 0.0))
    throw ConfigError("propensity learning rate must be > 0");
  if (!(clip > 0.0))
    throw ConfigError("propensity gradient clip must be > 0");
}

void to_json(nlohmann::json &j, const PropensityConfig &c) {
  j = {{"hidden", c.hidden}, {"epochs", c.epochs}, {"batch", c.batch},
       {"lr", c.lr},         {"clip", c.clip}};
}

void from_json(const nlohmann::json &j, PropensityConfig &c) {
  const PropensityConfig d;
  c.hidden = j.value("hidden", d.hidden);
  c.epochs = j.value("epochs", d.epochs);
  c.batch = j.value("batch", d.batch);
  c.lr = j.value("lr", d.lr);
  c.clip = j.value("clip", d.clip);
}

PropensityNet::PropensityNet(const std::string &name, int dims, int steps,
                             int hidden, Standardizer standardizer, Rng &rng)
    : cell(name + "/lstm", 3 * dims, hidden, rng),
      out(name + "/out", hidden, 1, rng), dims_(dims), steps_(steps),
      standardizer_(std::move(standardizer)) {}

std::vector<Parameter *> PropensityNet::parameters() {
  auto p = cell.parameters();
  for (Parameter *x : out.parameters())
    p.push_back(x);
  return p;
}

std::vector<const Parameter *> PropensityNet::parameters() const {
  auto *self = const_cast<PropensityNet *>(this);
  const auto p = self->parameters();
  return {p.begin(), p.end()};
}

Matrix propensity_features(const std::vector<const LongitudinalSample *> &batch,
                           int step, const Standardizer &standardizer) {
  const auto B = static_cast<Eigen::Index>(batch.size());
  const int D = standardizer.dims();
  Matrix f = Matrix::Zero(B, 3 * D);
  for (Eigen::Index b = 0; b < B; ++b) {
    const LongitudinalSample &s = *batch[static_cast<std::size_t>(b)];
    if (s.dims() != D)
      throw StructuralError("propensity: sample dimension mismatch");
    const double scale = 1.0 / s.steps();
    // Delta at this step from the mask history.
    for (int d = 0; d < D; ++d) {
      int last = -1;
      for (int r = 0; r < step - 1; ++r)
        if (s.mask(r, d))
          last = r;
      const int row = step - 1;
      const double delta = last < 0 ? row : row - last;
      f(b, d) = s.mask(row, d);
      f(b, D + d) = delta * scale;
      if (s.mask(row, d))
        f(b, 2 * D + d) = standardizer.apply(s.x(row, d), d);
    }
  }
  return f;
}

Tensor PropensityNet::logits(Tape &tape,
                             const std::vector<const LongitudinalSample *> &batch) {
  const auto B = static_cast<Eigen::Index>(batch.size());
  for (const LongitudinalSample *s : batch)
    if (s->steps() != steps_)
      throw StructuralError("propensity: panel length differs from the net");
  LstmCell::State st = cell.initial_state(tape, B);
  std::vector<Tensor> hs;
  hs.reserve(static_cast<std::size_t>(steps_));
  for (int s = 1; s <= steps_; ++s) {
    st = cell.step(tape, tape.constant(propensity_features(batch, s, standardizer_)),
                   st);
    hs.push_back(st.h);
  }
  Tensor z = out.forward(tape, concat_rows(hs)); // (steps * B) x 1, step-major
  return reshape(z, B, steps_);
}

Matrix PropensityNet::predict(const std::vector<LongitudinalSample> &samples) {
  Matrix p(static_cast<Eigen::Index>(samples.size()), steps_);
  constexpr std::size_t chunk = 512;
  for (std::size_t lo = 0; lo < samples.size(); lo += chunk) {
    const std::size_t hi = std::min(samples.size(), lo + chunk);
    std::vector<const LongitudinalSample *> batch;
    for (std::size_t i = lo; i < hi; ++i)
      batch.push_back(&samples[i]);
    Tape tape;
    const Matrix z = logits(tape, batch).value();
    p.middleRows(static_cast<Eigen::Index>(lo), z.rows()) =
        z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  }
  return p;
}

std::vector<double>
PropensityNet::followup_trace(const LongitudinalSample &sample) {
  Tape tape;
  const Matrix z = logits(tape, {&sample}).value();
  std::vector<double> trace(static_cast<std::size_t>(sample.followup));
  for (int t = 0; t < sample.followup; ++t)
    trace[static_cast<std::size_t>(t)] =
        1.0 / (1.0 + std::exp(-z(0, sample.history + t - 1)));
  return trace;
}

PropensityNet fit_propensity(const std::vector<LongitudinalSample> &samples,
                             const Standardizer &standardizer,
                             const PropensityConfig &config, std::uint64_t seed) {
  config.validate();
  if (samples.size() < 2)
    throw DegenerateTreatmentError("propensity fit needs at least two subjects");
  bool any0 = false, any1 = false;
  for (const LongitudinalSample &s : samples)
    for (int a : s.treatment)
      (a ? any1 : any0) = true;
  if (!(any0 && any1))
    throw DegenerateTreatmentError(
        "propensity fit: only one treatment value occurs in the data");

  const int steps = samples.front().steps();
  Rng rng(seed);
  PropensityNet net("propensity", standardizer.dims(), steps, config.hidden,
                    standardizer, rng);
  Adam adam(net.parameters(), AdamConfig{config.lr});
  std::vector<int> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t lo = 0; lo < order.size();
         lo += static_cast<std::size_t>(config.batch)) {
      const std::size_t hi =
          std::min(order.size(), lo + static_cast<std::size_t>(config.batch));
      std::vector<const LongitudinalSample *> batch;
      Matrix y(static_cast<Eigen::Index>(hi - lo), steps);
      for (std::size_t k = lo; k < hi; ++k) {
        const LongitudinalSample &s = samples[static_cast<std::size_t>(order[k])];
        batch.push_back(&s);
        for (int r = 0; r < steps; ++r)
          y(static_cast<Eigen::Index>(k - lo), r) =
              s.treatment[static_cast<std::size_t>(r)];
      }
      Tape tape;
      Tensor loss = affine(bce_with_logits(net.logits(tape, batch), y),
                           1.0 / static_cast<double>(y.size()), 0.0);
      zero_grads(net.parameters());
      tape.backward(loss);
      clip_grad_norm(net.parameters(), config.clip);
      adam.step();
    }
  }
  return net;
}

} // namespace tcs::tcsnet
