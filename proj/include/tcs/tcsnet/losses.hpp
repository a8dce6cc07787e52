#pragma once

#include "tcs/ndgrad/tape.hpp"
#include "tcs/tcsnet/labels.hpp"

#include <vector>

namespace tcs::tcsnet {

using ndgrad::Tensor;

// All losses take theta_hat as N x q (subjects x follow-up steps) and clamp it
// to [kProbFloor, 1 - kProbFloor] before any log.

// Negative log-likelihood in matrix form: -sum(gamma ln th + Theta ln(1 - th)).
double loss_l1(const Matrix &theta_hat, const LabelBatch &labels);
Tensor loss_l1(const Tensor &theta_hat, const LabelBatch &labels);

// Same quantity written per subject as an event term plus the at-risk sum.
double loss_l1_scalar(const Matrix &theta_hat, const LabelBatch &labels);

// Subject i has its event at step t + 1, subject j is still at risk at that
// step without an event there.
struct RankPair {
  int t;
  int i;
  int j;
};

std::vector<RankPair> rank_pairs(const LabelBatch &labels);

// Pairs with theta_hat(i, t) > theta_hat(j, t), strictly.
long long exact_pair_count(const Matrix &theta_hat,
                           const std::vector<RankPair> &pairs);

// -sum over pairs of sigmoid((theta_hat(i, t) - theta_hat(j, t)) / temperature).
// Throws UsageError unless temperature > 0.
double loss_l2(const Matrix &theta_hat, const std::vector<RankPair> &pairs,
               double temperature);
Tensor loss_l2(const Tensor &theta_hat, const std::vector<RankPair> &pairs,
               double temperature);

// Summed binary cross-entropy of sigmoid(logits) against 0/1 labels.
Tensor bce_with_logits(const Tensor &logits, const Matrix &labels);

// Summed squared error.
Tensor squared_error(const Tensor &pred, const Matrix &target);

} // namespace tcs::tcsnet
