#include "tcs/tcsnet/labels.hpp"

#include "tcs/error.hpp"

#include <numeric>

namespace tcs::tcsnet {

LabelMatrix build_labels(int tau, bool event, int q) {
  if (tau < 1)
    throw DataError("label construction: tau must be >= 1, got " +
                    std::to_string(tau));
  if (tau > q + 1)
    throw DataError("label construction: tau exceeds q + 1");
  LabelMatrix l;
  l.tau = tau;
  l.theta = Vector::Zero(q);
  l.gamma = Vector::Zero(q);
  l.theta.head(tau - 1).setOnes();
  if (event && tau <= q) {
    l.gamma(tau - 1) = 1.0;
    l.event = 1;
  }
  return l;
}

LabelMatrix build_labels(const LongitudinalSample &sample, int q) {
  return build_labels(sample.tau(), sample.event(), q);
}

LabelBatch stack_labels(const std::vector<LongitudinalSample> &samples,
                        std::span<const int> rows, int q) {
  LabelBatch b;
  const auto n = static_cast<Eigen::Index>(rows.size());
  b.theta.resize(n, q);
  b.gamma.resize(n, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    const LabelMatrix l =
        build_labels(samples[static_cast<std::size_t>(rows[i])], q);
    b.theta.row(i) = l.theta.transpose();
    b.gamma.row(i) = l.gamma.transpose();
    b.tau.push_back(l.tau);
    b.event.push_back(l.event);
  }
  return b;
}

LabelBatch stack_labels(const std::vector<LongitudinalSample> &samples, int q) {
  std::vector<int> rows(samples.size());
  std::iota(rows.begin(), rows.end(), 0);
  return stack_labels(samples, rows, q);
}

} // namespace tcs::tcsnet
