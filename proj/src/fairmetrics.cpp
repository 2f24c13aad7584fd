#include "fairscore/fairmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fairscore {

std::optional<double> GroupCounts::fpr() const {
  std::size_t d = fp + tn;
  if (d == 0) return std::nullopt;
  return static_cast<double>(fp) / static_cast<double>(d);
}
std::optional<double> GroupCounts::fnr() const {
  std::size_t d = fn + tp;
  if (d == 0) return std::nullopt;
  return static_cast<double>(fn) / static_cast<double>(d);
}
std::optional<double> GroupCounts::ppv() const {
  std::size_t d = tp + fp;
  if (d == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(d);
}
std::optional<double> GroupCounts::acceptance() const {
  if (size() == 0) return std::nullopt;
  return static_cast<double>(tp + fp) / static_cast<double>(size());
}

GroupConfusion confusion(const ScoreSet& s, double tau) {
  s.validate();
  GroupConfusion c;
  for (std::size_t i = 0; i < s.size(); ++i) {
    GroupCounts& g = c.group[static_cast<std::size_t>(s.sensitive[i])];
    const bool accept = s.scores[i] > tau;  // strict; ties at tau rejected
    if (s.labels[i] == 1)
      accept ? ++g.tp : ++g.fn;
    else
      accept ? ++g.fp : ++g.tn;
  }
  if (c.group[0].size() == 0) throw EmptyGroup("group 0 empty");
  if (c.group[1].size() == 0) throw EmptyGroup("group 1 empty");
  return c;
}

double independence(const ScoreSet& s, double tau) {
  GroupConfusion c = confusion(s, tau);
  return std::abs(*c.group[0].acceptance() - *c.group[1].acceptance());
}

std::pair<double, double> separation_components(const ScoreSet& s, double tau) {
  GroupConfusion c = confusion(s, tau);
  for (int g = 0; g < 2; ++g) {
    if (!c.group[static_cast<std::size_t>(g)].fpr().has_value())
      throw EmptyGroupClass("group " + std::to_string(g) + " has no negatives");
    if (!c.group[static_cast<std::size_t>(g)].fnr().has_value())
      throw EmptyGroupClass("group " + std::to_string(g) + " has no positives");
  }
  return {*c.group[1].fpr() - *c.group[0].fpr(),
          *c.group[1].fnr() - *c.group[0].fnr()};
}

double separation(const ScoreSet& s, double tau) {
  auto [dfpr, dfnr] = separation_components(s, tau);
  return 0.5 * std::abs(dfpr + dfnr);
}

double sufficiency(const ScoreSet& s, double tau) {
  GroupConfusion c = confusion(s, tau);
  for (int g = 0; g < 2; ++g)
    if (!c.group[static_cast<std::size_t>(g)].ppv().has_value())
      throw NoAccepted("group " + std::to_string(g) + " accepts nothing");
  return std::abs(*c.group[0].ppv() - *c.group[1].ppv());
}

double auc(const ScoreSet& s) {
  s.validate();
  std::size_t n_pos = 0, n_neg = 0;
  for (int y : s.labels) (y == 1 ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0) throw OneClassOnly("need both classes for AUC");

  // Midrank formula: AUC = (rank_sum_pos - n_pos(n_pos+1)/2) / (n_pos * n_neg).
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return s.scores[a] < s.scores[b];
  });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && s.scores[order[j]] == s.scores[order[i]]) ++j;
    double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t t = i; t < j; ++t)
      if (s.labels[order[t]] == 1) rank_sum_pos += midrank;
    i = j;
  }
  double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

AcceptanceRates acceptance_rate(const ScoreSet& s, double tau) {
  GroupConfusion c = confusion(s, tau);
  AcceptanceRates r;
  std::size_t accepted = 0;
  for (int g = 0; g < 2; ++g) {
    const GroupCounts& gc = c.group[static_cast<std::size_t>(g)];
    r.group[static_cast<std::size_t>(g)] = *gc.acceptance();
    accepted += gc.tp + gc.fp;
  }
  r.overall = static_cast<double>(accepted) / static_cast<double>(s.size());
  return r;
}

}  // namespace fairscore
