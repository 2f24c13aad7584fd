#include "fairscore/profit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fairscore {

void CostModel::validate() const {
  if (!(roi > 0.0)) throw ConfigError("cost.roi must be > 0");
  if (p0 < 0.0 || p1 < 0.0 || p0 + p1 > 1.0 + 1e-12)
    throw ConfigError("cost.p0/p1 must be non-negative with p0 + p1 <= 1");
  if (quadrature_points < 2) throw ConfigError("quadrature_points must be >= 2");
}

namespace {

struct ClassCdfs {
  double pi0 = 0.0, pi1 = 0.0;
  // Sorted scores per class for empirical CDF evaluation.
  std::vector<double> neg, pos;
};

ClassCdfs class_cdfs(const ScoreSet& s) {
  ClassCdfs c;
  for (std::size_t i = 0; i < s.size(); ++i)
    (s.labels[i] == 1 ? c.pos : c.neg).push_back(s.scores[i]);
  const double n = static_cast<double>(s.size());
  c.pi1 = static_cast<double>(c.pos.size()) / n;
  c.pi0 = static_cast<double>(c.neg.size()) / n;
  std::sort(c.neg.begin(), c.neg.end());
  std::sort(c.pos.begin(), c.pos.end());
  return c;
}

// P(score <= tau) within a sorted class; matches the strict "> tau" acceptance.
double cdf(const std::vector<double>& sorted, double tau) {
  if (sorted.empty()) return 0.0;
  auto it = std::upper_bound(sorted.begin(), sorted.end(), tau);
  return static_cast<double>(it - sorted.begin()) /
         static_cast<double>(sorted.size());
}

double integrand(const ClassCdfs& c, double tau, double b, const CostModel& cm) {
  const double f1 = cdf(c.pos, tau);
  const double f0 = cdf(c.neg, tau);
  return cm.roi * (c.pi1 * (1.0 - f1) - c.pi1 * f1) - b * c.pi0 * (1.0 - f0);
}

}  // namespace

std::vector<double> candidate_cutoffs(const std::vector<double>& scores) {
  std::vector<double> uniq = scores;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  std::vector<double> cuts{0.0};
  for (std::size_t i = 0; i + 1 < uniq.size(); ++i)
    cuts.push_back(0.5 * (uniq[i] + uniq[i + 1]));
  cuts.push_back(1.0);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

double profit_at(const ScoreSet& s, double tau, double b, const CostModel& cm) {
  s.validate();
  cm.validate();
  if (b < 0.0 || b > 1.0) throw ConfigError("b must lie in [0,1]");
  return integrand(class_cdfs(s), tau, b, cm);
}

ExpectedProfit expected_profit(const ScoreSet& s, const CostModel& cm) {
  s.validate();
  cm.validate();
  ClassCdfs c = class_cdfs(s);
  if (c.pos.empty() || c.neg.empty())
    throw OneClassOnly("expected_profit needs both classes");

  const std::vector<double> cuts = candidate_cutoffs(s.scores);
  auto best = [&](double b, double* cutoff) {
    double best_v = -std::numeric_limits<double>::infinity();
    double best_tau = cuts.front();
    for (double tau : cuts) {
      double v = integrand(c, tau, b, cm);
      if (v > best_v) {
        best_v = v;
        best_tau = tau;
      }
    }
    if (cutoff) *cutoff = best_tau;
    return best_v;
  };

  ExpectedProfit out;
  const double mass_u = 1.0 - cm.p0 - cm.p1;
  double total = 0.0;
  total += cm.p0 * best(0.0, &out.cutoff_at_b0);
  total += cm.p1 * best(1.0, &out.cutoff_at_b1);
  if (mass_u > 0.0) {
    const int m = cm.quadrature_points;
    out.node_cutoffs.resize(static_cast<std::size_t>(m));
    double integral = 0.0;
    for (int i = 0; i < m; ++i) {
      double b = static_cast<double>(i) / static_cast<double>(m - 1);
      double v = best(b, &out.node_cutoffs[static_cast<std::size_t>(i)]);
      double w = (i == 0 || i == m - 1) ? 0.5 : 1.0;
      integral += w * v;
    }
    integral /= static_cast<double>(m - 1);
    total += mass_u * integral;
  }
  out.value = total;
  return out;
}

double operating_cutoff(const CostModel& cm) {
  cm.validate();
  const double eb = cm.expected_b();
  return eb / (2.0 * cm.roi + eb);
}

ProfitPerEur profit_per_eur(const ScoreSet& s, const CostModel& cm) {
  s.validate();
  cm.validate();
  ProfitPerEur out;
  out.cutoff = operating_cutoff(cm);
  // The integrand is affine in b, so integrating over B at fixed tau equals
  // evaluating at E[B].
  out.raw = integrand(class_cdfs(s), out.cutoff, cm.expected_b(), cm);
  std::size_t accepted = 0;
  for (double sc : s.scores)
    if (sc > out.cutoff) ++accepted;
  out.acceptance = static_cast<double>(accepted) / static_cast<double>(s.size());
  if (accepted > 0) out.normalized = out.raw / out.acceptance;
  return out;
}

}  // namespace fairscore
