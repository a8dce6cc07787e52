#include "tcs/metrics/metrics.hpp"

#include "tcs/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tcs::metrics {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<int> all_rows(Eigen::Index n) {
  std::vector<int> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

void check_group(std::span<const int> group, Eigen::Index n) {
  if (group.empty())
    throw SelectionError("metric evaluated on an empty subgroup");
  for (int r : group)
    if (r < 0 || r >= n)
      throw SelectionError("subgroup row index out of range");
}

void check_aligned(const Matrix &a, const Matrix &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw StructuralError("metric inputs are not aligned");
}

// Fenwick tree over 1-based ranks.
class CountTree {
public:
  explicit CountTree(std::size_t n) : tree_(n + 1, 0) {}
  void add(std::size_t i) {
    for (; i < tree_.size(); i += i & (~i + 1))
      ++tree_[i];
  }
  long long prefix(std::size_t i) const {
    long long s = 0;
    for (; i > 0; i -= i & (~i + 1))
      s += tree_[i];
    return s;
  }

private:
  std::vector<long long> tree_;
};

} // namespace

double nanmean(const Vector &v) {
  double s = 0.0;
  int n = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::isfinite(v(i))) {
      s += v(i);
      ++n;
    }
  return n ? s / n : kNaN;
}

Vector mse(const Matrix &est, const Matrix &truth, std::span<const int> group) {
  check_aligned(est, truth);
  check_group(group, est.rows());
  Vector out = Vector::Zero(est.cols());
  for (int r : group)
    out += (est.row(r) - truth.row(r)).array().square().matrix().transpose();
  return out / static_cast<double>(group.size());
}

Vector mse(const Matrix &est, const Matrix &truth) {
  const auto rows = all_rows(est.rows());
  return mse(est, truth, rows);
}

Vector rmse(const Matrix &est, const Matrix &truth, std::span<const int> group) {
  return mse(est, truth, group).array().sqrt().matrix();
}

Vector rmse(const Matrix &est, const Matrix &truth) {
  return mse(est, truth).array().sqrt().matrix();
}

double BiasResult::mean() const { return nanmean(per_time); }

BiasResult bias(const Matrix &est, const Matrix &truth,
                std::span<const int> group, double floor) {
  check_aligned(est, truth);
  check_group(group, est.rows());
  BiasResult res;
  res.per_time = Vector::Constant(est.cols(), kNaN);
  res.skipped.assign(static_cast<std::size_t>(est.cols()), 0);
  bool any = false;
  for (Eigen::Index t = 0; t < est.cols(); ++t) {
    double acc = 0.0;
    int used = 0;
    for (int r : group) {
      const double truth_v = truth(r, t);
      if (std::abs(truth_v) <= floor) {
        ++res.skipped[static_cast<std::size_t>(t)];
        continue;
      }
      acc += std::abs((est(r, t) - truth_v) / truth_v);
      ++used;
    }
    if (used > 0) {
      res.per_time(t) = acc / used;
      any = true;
    }
  }
  if (!any)
    throw UndefinedMetricError(
        "percentage bias undefined: every true effect is within the floor");
  return res;
}

BiasResult bias(const Matrix &est, const Matrix &truth, double floor) {
  const auto rows = all_rows(est.rows());
  return bias(est, truth, rows, floor);
}

Vector coverage(const Matrix &lo, const Matrix &hi, const Matrix &truth,
                std::span<const int> group) {
  check_aligned(lo, truth);
  check_aligned(hi, truth);
  check_group(group, truth.rows());
  if ((lo.array() > hi.array()).any())
    throw StructuralError("coverage: band lower bound exceeds upper bound");
  Vector out = Vector::Zero(truth.cols());
  for (int r : group)
    for (Eigen::Index t = 0; t < truth.cols(); ++t)
      if (truth(r, t) >= lo(r, t) && truth(r, t) <= hi(r, t))
        out(t) += 1.0;
  return out / static_cast<double>(group.size());
}

Vector coverage(const Matrix &lo, const Matrix &hi, const Matrix &truth) {
  const auto rows = all_rows(truth.rows());
  return coverage(lo, hi, truth, rows);
}

double concordance(std::span<const double> risk, std::span<const int> times,
                   std::span<const int> events) {
  const std::size_t n = risk.size();
  if (times.size() != n || events.size() != n)
    throw StructuralError("concordance: input lengths differ");

  // Dense 1-based ranks of the risk scores.
  std::vector<double> sorted(risk.begin(), risk.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<std::size_t> rank(n);
  for (std::size_t i = 0; i < n; ++i)
    rank[i] = static_cast<std::size_t>(
                  std::lower_bound(sorted.begin(), sorted.end(), risk[i]) -
                  sorted.begin()) +
              1;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return times[a] > times[b]; });

  // Walk groups of equal time from latest to earliest; the tree holds every
  // subject with a strictly later time.
  CountTree tree(sorted.size());
  long long inserted = 0;
  double concordant = 0.0;
  long long comparable = 0;
  for (std::size_t g = 0; g < n;) {
    std::size_t end = g;
    while (end < n && times[order[end]] == times[order[g]])
      ++end;
    for (std::size_t k = g; k < end; ++k) {
      const std::size_t i = order[k];
      if (!events[i])
        continue;
      const long long below = tree.prefix(rank[i] - 1);
      const long long tied = tree.prefix(rank[i]) - below;
      concordant += static_cast<double>(below) + 0.5 * static_cast<double>(tied);
      comparable += inserted;
    }
    for (std::size_t k = g; k < end; ++k) {
      tree.add(rank[order[k]]);
      ++inserted;
    }
    g = end;
  }
  if (comparable == 0)
    throw UndefinedMetricError("concordance: no comparable pairs");
  return concordant / static_cast<double>(comparable);
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  const std::size_t n = scores.size();
  if (labels.size() != n)
    throw StructuralError("auroc: input lengths differ");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  long long pos = 0;
  for (std::size_t g = 0; g < n;) {
    std::size_t end = g;
    while (end < n && scores[order[end]] == scores[order[g]])
      ++end;
    const double avg_rank = 0.5 * static_cast<double>(g + 1 + end);
    for (std::size_t k = g; k < end; ++k)
      if (labels[order[k]]) {
        rank_sum += avg_rank;
        ++pos;
      }
    g = end;
  }
  const long long neg = static_cast<long long>(n) - pos;
  if (pos == 0 || neg == 0)
    throw UndefinedMetricError("auroc: needs at least one label of each class");
  const double u = rank_sum - 0.5 * static_cast<double>(pos) * (pos + 1);
  return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

MetricReport MetricReport::empty(int q) {
  MetricReport r;
  r.rmse = r.mse = r.bias_ate = r.bias_ite = r.coverage = r.concordance =
      r.auroc = Vector::Constant(q, kNaN);
  r.bias_skipped.assign(static_cast<std::size_t>(q), 0);
  r.auroc_pooled = kNaN;
  return r;
}

} // namespace tcs::metrics
