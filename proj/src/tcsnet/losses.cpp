#include "tcs/tcsnet/losses.hpp"

#include "tcs/error.hpp"
#include "tcs/ndgrad/ops.hpp"

#include <cmath>

namespace tcs::tcsnet {

using ndgrad::kProbFloor;
using ndgrad::Tape;

namespace {

void check_shape(const Matrix &theta_hat, const LabelBatch &labels) {
  if (theta_hat.rows() != labels.theta.rows() ||
      theta_hat.cols() != labels.theta.cols())
    throw StructuralError("loss: predictions and labels are not aligned");
}

double clamp_prob(double p) {
  return std::min(std::max(p, kProbFloor), 1.0 - kProbFloor);
}

double sigmoid(double z) {
  if (z >= 0.0)
    return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_temperature(double temperature) {
  if (!(temperature > 0.0))
    throw UsageError("rank loss temperature must be positive");
}

} // namespace

double loss_l1(const Matrix &theta_hat, const LabelBatch &labels) {
  check_shape(theta_hat, labels);
  const Eigen::ArrayXXd c = theta_hat.array().unaryExpr(&clamp_prob);
  return -(labels.gamma.array() * c.log() +
           labels.theta.array() * (1.0 - c).log())
              .sum();
}

Tensor loss_l1(const Tensor &theta_hat, const LabelBatch &labels) {
  check_shape(theta_hat.value(), labels);
  Tape &tape = *theta_hat.tape();
  Matrix value(1, 1);
  value(0, 0) = loss_l1(theta_hat.value(), labels);
  return tape.record(
      "loss_l1", std::move(value), {theta_hat},
      [theta_hat, &labels](Tape &tp, const Matrix &, const Matrix &g) {
        const Eigen::ArrayXXd p = theta_hat.value().array();
        const Eigen::ArrayXXd c = p.unaryExpr(&clamp_prob);
        const Eigen::ArrayXXd inside =
            (p >= kProbFloor && p <= 1.0 - kProbFloor).cast<double>();
        const Eigen::ArrayXXd d =
            (-labels.gamma.array() / c + labels.theta.array() / (1.0 - c)) *
            inside;
        tp.accumulate(theta_hat, (g(0, 0) * d).matrix());
      });
}

double loss_l1_scalar(const Matrix &theta_hat, const LabelBatch &labels) {
  check_shape(theta_hat, labels);
  double total = 0.0;
  for (int i = 0; i < labels.size(); ++i) {
    const int tau = labels.tau[static_cast<std::size_t>(i)];
    const int e = labels.event[static_cast<std::size_t>(i)];
    double uncensored = 0.0, censored = 0.0;
    double at_risk = 0.0;
    for (int j = 1; j < tau; ++j)
      at_risk += std::log(1.0 - clamp_prob(theta_hat(i, j - 1)));
    if (e)
      uncensored = std::log(clamp_prob(theta_hat(i, tau - 1))) + at_risk;
    else
      censored = at_risk;
    total += uncensored + censored;
  }
  return -total;
}

std::vector<RankPair> rank_pairs(const LabelBatch &labels) {
  std::vector<RankPair> pairs;
  const int n = labels.size();
  const int q = static_cast<int>(labels.gamma.cols());
  for (int t = 0; t < q; ++t)
    for (int i = 0; i < n; ++i) {
      if (labels.gamma(i, t) != 1.0)
        continue;
      for (int j = 0; j < n; ++j)
        if (j != i && labels.gamma(j, t) == 0.0 &&
            labels.tau[static_cast<std::size_t>(j)] >= t + 1)
          pairs.push_back({t, i, j});
    }
  return pairs;
}

long long exact_pair_count(const Matrix &theta_hat,
                           const std::vector<RankPair> &pairs) {
  long long count = 0;
  for (const RankPair &p : pairs)
    if (theta_hat(p.i, p.t) > theta_hat(p.j, p.t))
      ++count;
  return count;
}

double loss_l2(const Matrix &theta_hat, const std::vector<RankPair> &pairs,
               double temperature) {
  check_temperature(temperature);
  double total = 0.0;
  for (const RankPair &p : pairs)
    total += sigmoid((theta_hat(p.i, p.t) - theta_hat(p.j, p.t)) / temperature);
  return -total;
}

Tensor loss_l2(const Tensor &theta_hat, const std::vector<RankPair> &pairs,
               double temperature) {
  check_temperature(temperature);
  Tape &tape = *theta_hat.tape();
  Matrix value(1, 1);
  value(0, 0) = loss_l2(theta_hat.value(), pairs, temperature);
  return tape.record(
      "loss_l2", std::move(value), {theta_hat},
      [theta_hat, &pairs, temperature](Tape &tp, const Matrix &,
                                       const Matrix &g) {
        const Matrix &th = theta_hat.value();
        Matrix d = Matrix::Zero(th.rows(), th.cols());
        for (const RankPair &p : pairs) {
          const double s = sigmoid((th(p.i, p.t) - th(p.j, p.t)) / temperature);
          const double k = -s * (1.0 - s) / temperature;
          d(p.i, p.t) += k;
          d(p.j, p.t) -= k;
        }
        tp.accumulate(theta_hat, g(0, 0) * d);
      });
}

Tensor bce_with_logits(const Tensor &logits, const Matrix &labels) {
  if (logits.rows() != labels.rows() || logits.cols() != labels.cols())
    throw StructuralError("bce: logits and labels are not aligned");
  Tape &tape = *logits.tape();
  const Eigen::ArrayXXd z = logits.value().array();
  const Eigen::ArrayXXd y = labels.array();
  // softplus(z) - y z
  const Eigen::ArrayXXd sp =
      z.max(0.0) + (-z.abs()).exp().log1p();
  Matrix value(1, 1);
  value(0, 0) = (sp - y * z).sum();
  return tape.record(
      "bce_with_logits", std::move(value), {logits},
      [logits, labels](Tape &tp, const Matrix &, const Matrix &g) {
        const Matrix p = logits.value().unaryExpr(&sigmoid);
        tp.accumulate(logits, g(0, 0) * (p - labels));
      });
}

Tensor squared_error(const Tensor &pred, const Matrix &target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw StructuralError("squared_error: prediction and target not aligned");
  Tape &tape = *pred.tape();
  Matrix value(1, 1);
  value(0, 0) = (pred.value() - target).squaredNorm();
  return tape.record("squared_error", std::move(value), {pred},
                     [pred, target](Tape &tp, const Matrix &, const Matrix &g) {
                       tp.accumulate(pred,
                                     2.0 * g(0, 0) * (pred.value() - target));
                     });
}

} // namespace tcs::tcsnet
