#include "oracles.hpp"

#include <cmath>
#include <random>

namespace oracle {

double concordance(const std::vector<double> &risk, const std::vector<int> &times,
                   const std::vector<int> &events) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < risk.size(); ++i)
    for (std::size_t j = 0; j < risk.size(); ++j) {
      if (i == j || !events[i] || !(times[i] < times[j]))
        continue;
      den += 1.0;
      if (risk[i] > risk[j])
        num += 1.0;
      else if (risk[i] == risk[j])
        num += 0.5;
    }
  return num / den;
}

double auroc(const std::vector<double> &scores, const std::vector<int> &labels) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (!labels[i] || labels[j])
        continue;
      den += 1.0;
      if (scores[i] > scores[j])
        num += 1.0;
      else if (scores[i] == scores[j])
        num += 0.5;
    }
  return num / den;
}

Vector kaplan_meier(const std::vector<int> &tau, const std::vector<int> &event,
                    int q) {
  Vector s(q);
  double surv = 1.0;
  for (int k = 1; k <= q; ++k) {
    int at_risk = 0;
    int deaths = 0;
    for (std::size_t i = 0; i < tau.size(); ++i) {
      if (tau[i] >= k)
        ++at_risk;
      if (tau[i] == k && event[i])
        ++deaths;
    }
    if (at_risk > 0)
      surv *= 1.0 - static_cast<double>(deaths) / at_risk;
    s(k - 1) = surv;
  }
  return s;
}

long long rank_pair_count(const std::vector<int> &tau,
                          const std::vector<int> &event, int q) {
  long long n = 0;
  for (int t = 1; t <= q; ++t)
    for (std::size_t i = 0; i < tau.size(); ++i)
      for (std::size_t j = 0; j < tau.size(); ++j) {
        const bool i_event_here = event[i] && tau[i] == t;
        const bool j_event_here = event[j] && tau[j] == t;
        if (i != j && i_event_here && tau[j] >= t && !j_event_here)
          ++n;
      }
  return n;
}

Matrix delta_scan(const tcs::MaskMatrix &mask) {
  Matrix d = Matrix::Zero(mask.rows(), mask.cols());
  for (Eigen::Index c = 0; c < mask.cols(); ++c)
    for (Eigen::Index r = 1; r < mask.rows(); ++r) {
      Eigen::Index last = -1;
      for (Eigen::Index k = r - 1; k >= 0; --k)
        if (mask(k, c)) {
          last = k;
          break;
        }
      d(r, c) = last < 0 ? static_cast<double>(r) : static_cast<double>(r - last);
    }
  return d;
}

namespace {

double hazard(const Matrix &panel, int u, int k, int a,
              const tcs::simgen::ScenarioConfig &cfg) {
  double sx = 0.0;
  for (Eigen::Index d = 0; d < panel.cols(); ++d)
    sx += panel(u + k - 1, d);
  return std::log(static_cast<double>(k)) / cfg.lambda_scale *
         (cfg.treat_coef * a + cfg.beta * sx);
}

} // namespace

Rates resimulate(const tcs::simgen::ScenarioConfig &cfg, int n, unsigned seed) {
  std::minstd_rand rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int u = cfg.history;
  const int q = cfg.followup;
  const int T = u + q;
  Rates r;
  Matrix panel(T, cfg.d);
  for (int i = 0; i < n; ++i) {
    for (int s = 1; s <= T; ++s)
      for (int d = 0; d < cfg.d; ++d)
        panel(s - 1, d) = std::sqrt(static_cast<double>(s)) +
                          std::sqrt(cfg.variance) * z(rng);
    std::vector<int> a(static_cast<std::size_t>(T));
    for (int s = 0; s < T; ++s) {
      const bool ind = panel(s, 0) + panel(s, 1) + panel(s, 2) > cfg.exposure_threshold;
      const double p = cfg.eta * (ind ? 1.0 : 0.0) + 0.5 * (1.0 - cfg.eta);
      a[static_cast<std::size_t>(s)] = unif(rng) < p ? 1 : 0;
    }
    const double ue = unif(rng);
    const double uc = unif(rng);
    int ts = q + 1;
    for (int k = 1; k <= q; ++k)
      if (std::exp(-hazard(panel, u, k, a[static_cast<std::size_t>(u + k - 1)], cfg)) <
          ue) {
        ts = k;
        break;
      }
    int tc = q;
    for (int k = 1; k <= q; ++k)
      if (std::exp(-std::log(static_cast<double>(k)) / cfg.lambda_scale) < uc) {
        tc = k;
        break;
      }
    if (ts <= tc && ts <= q)
      r.event += 1.0;
    if (tc < ts)
      r.censored += 1.0;
    r.mean_tau += std::min(ts, tc);
  }
  r.event /= n;
  r.censored /= n;
  r.mean_tau /= n;
  return r;
}

Vector mc_ite(const Matrix &panel, const tcs::simgen::ScenarioConfig &cfg,
              int draws, unsigned seed) {
  std::minstd_rand rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int u = cfg.history;
  const int q = cfg.followup;
  Vector ite = Vector::Zero(q);
  for (int m = 0; m < draws; ++m) {
    const double ue = unif(rng);
    int t1 = q + 1, t0 = q + 1;
    for (int k = q; k >= 1; --k) {
      if (std::exp(-hazard(panel, u, k, 1, cfg)) < ue)
        t1 = k;
      if (std::exp(-hazard(panel, u, k, 0, cfg)) < ue)
        t0 = k;
    }
    for (int k = 1; k <= q; ++k)
      ite(k - 1) += (t1 > k ? 1.0 : 0.0) - (t0 > k ? 1.0 : 0.0);
  }
  return ite / draws;
}

GradCheck finite_difference(const std::vector<tcs::ndgrad::Parameter *> &params,
                            const std::function<double()> &loss,
                            const std::function<void()> &analytic, double eps,
                            double floor) {
  for (auto *p : params)
    p->grad.setZero(p->value.rows(), p->value.cols());
  analytic();
  GradCheck out;
  for (auto *p : params)
    for (Eigen::Index k = 0; k < p->value.size(); ++k) {
      double &w = p->value.data()[k];
      const double saved = w;
      w = saved + eps;
      const double up = loss();
      w = saved - eps;
      const double down = loss();
      w = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double exact = p->grad.data()[k];
      const double rel = std::abs(numeric - exact) /
                         std::max({std::abs(numeric), std::abs(exact), floor});
      ++out.checked;
      if (rel > out.max_rel_error) {
        out.max_rel_error = rel;
        out.worst = p->name + "[" + std::to_string(k) + "] analytic " +
                    std::to_string(exact) + " numeric " + std::to_string(numeric);
      }
    }
  return out;
}

} // namespace oracle
