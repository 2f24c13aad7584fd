#include "fairscore/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "fairscore/fairmetrics.hpp"
#include "fairscore/rng.hpp"

namespace fairscore {

namespace {

double read_double(std::istream& in) {
  std::string tok;
  if (!(in >> tok)) throw IoError("truncated rule file");
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw IoError("bad numeric token '" + tok + "'");
  return v;
}

}  // namespace

void CriticalRegion::validate() const {
  if (!(theta > 0.5) || !(theta < 1.0))
    throw ConfigError("critical region theta must lie in (0.5, 1)");
}

ScoreSet reject_option_apply(const ScoreSet& s, double theta) {
  CriticalRegion{theta}.validate();
  s.validate();
  ScoreSet out = s;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double conf = std::max(s.scores[i], 1.0 - s.scores[i]);
    if (conf <= theta) out.scores[i] = s.sensitive[i] == 1 ? 1.0 : 0.0;
  }
  return out;
}

double signed_fairness(const ScoreSet& s, FairnessCriterion criterion,
                       double tau) {
  GroupConfusion c = confusion(s, tau);
  switch (criterion) {
    case FairnessCriterion::Independence:
      return c.group[1].acceptance().value_or(0.0) -
             c.group[0].acceptance().value_or(0.0);
    case FairnessCriterion::Separation:
      return 0.5 * ((c.group[1].fpr().value_or(0.0) -
                     c.group[0].fpr().value_or(0.0)) +
                    (c.group[1].fnr().value_or(0.0) -
                     c.group[0].fnr().value_or(0.0)));
    case FairnessCriterion::Sufficiency:
      return c.group[0].ppv().value_or(0.0) - c.group[1].ppv().value_or(0.0);
  }
  throw ConfigError("unknown fairness criterion");
}

RejectOptionResult reject_option_tune(const ScoreSet& validation,
                                      double bound_lo, double bound_hi,
                                      FairnessCriterion criterion,
                                      const CostModel& cm, int n_thetas) {
  if (validation.size() == 0) throw EmptyValidation("reject option tuning");
  validation.validate();
  if (bound_lo > bound_hi) throw ConfigError("fairness bound is empty");
  if (n_thetas < 1) throw ConfigError("n_thetas must be positive");

  const double tau = operating_cutoff(cm);
  RejectOptionResult best_ok;
  bool have_ok = false;
  RejectOptionResult best_near;
  double best_dist = std::numeric_limits<double>::infinity();

  for (int j = 0; j < n_thetas; ++j) {
    double theta =
        0.5 + 0.5 * static_cast<double>(j + 1) / static_cast<double>(n_thetas + 1);
    ScoreSet adjusted = reject_option_apply(validation, theta);
    RejectOptionResult r;
    r.theta = theta;
    r.stat = signed_fairness(adjusted, criterion, tau);
    r.profit = expected_profit(adjusted, cm).value;
    if (r.stat >= bound_lo && r.stat <= bound_hi) {
      r.satisfied = true;
      if (!have_ok || r.profit > best_ok.profit) {
        best_ok = r;
        have_ok = true;
      }
    } else {
      double dist = r.stat < bound_lo ? bound_lo - r.stat : r.stat - bound_hi;
      if (dist < best_dist) {
        best_dist = dist;
        best_near = r;
      }
    }
  }
  return have_ok ? best_ok : best_near;
}

namespace {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double cutoff = 0.0;
};

// All achievable operating points of one group: cutoffs at 1 (accept none),
// midpoints of adjacent distinct scores, and -1 (accept all).
std::vector<RocPoint> roc_points(const std::vector<double>& scores,
                                 const std::vector<int>& labels) {
  std::size_t pos = 0, neg = 0;
  for (int y : labels) (y == 1 ? pos : neg) += 1;
  if (pos == 0 || neg == 0) throw EmptyGroupClass("group lacks a class");

  std::vector<double> distinct = scores;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<double> cutoffs{1.0, -1.0};
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
    cutoffs.push_back(0.5 * (distinct[i] + distinct[i + 1]));

  std::vector<RocPoint> pts;
  for (double c : cutoffs) {
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i)
      if (scores[i] > c) (labels[i] == 1 ? tp : fp) += 1;
    pts.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                   static_cast<double>(tp) / static_cast<double>(pos), c});
  }
  std::sort(pts.begin(), pts.end(), [](const RocPoint& a, const RocPoint& b) {
    return a.fpr != b.fpr ? a.fpr < b.fpr : a.tpr < b.tpr;
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const RocPoint& a, const RocPoint& b) {
                          return a.fpr == b.fpr && a.tpr == b.tpr;
                        }),
            pts.end());
  return pts;
}

double cross(const RocPoint& o, const RocPoint& a, const RocPoint& b) {
  return (a.fpr - o.fpr) * (b.tpr - o.tpr) - (a.tpr - o.tpr) * (b.fpr - o.fpr);
}

// Upper convex hull from (0,0) to (1,1), slopes non-increasing. Among
// points sharing an FPR only the highest TPR can lie on the hull.
std::vector<RocPoint> upper_hull(const std::vector<RocPoint>& pts) {
  std::vector<RocPoint> best;
  for (const RocPoint& p : pts) {
    if (!best.empty() && best.back().fpr == p.fpr)
      best.back() = p;  // sorted ascending by (fpr, tpr)
    else
      best.push_back(p);
  }
  std::vector<RocPoint> hull;
  for (const RocPoint& p : best) {
    while (hull.size() >= 2 &&
           cross(hull[hull.size() - 2], hull.back(), p) >= 0.0)
      hull.pop_back();
    hull.push_back(p);
  }
  return hull;
}

double hull_value(const std::vector<RocPoint>& hull, double f) {
  if (f <= hull.front().fpr) return hull.front().tpr;
  if (f >= hull.back().fpr) return hull.back().tpr;
  for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
    if (f <= hull[i + 1].fpr) {
      double span = hull[i + 1].fpr - hull[i].fpr;
      if (span <= 0.0) return std::max(hull[i].tpr, hull[i + 1].tpr);
      double w = (f - hull[i].fpr) / span;
      return hull[i].tpr + w * (hull[i + 1].tpr - hull[i].tpr);
    }
  }
  return hull.back().tpr;
}

struct Realization {
  GroupDecisionRule::GroupRule rule;
  double fpr = 0.0, tpr = 0.0;  // expected rates achieved
  double err = std::numeric_limits<double>::infinity();
};

// Best single-coin mixture of two cutoffs hitting FPR exactly (when
// possible) and TPR as close as possible.
Realization realize(const std::vector<RocPoint>& pts, double f, double t) {
  Realization best;
  for (const RocPoint& left : pts) {
    if (left.fpr > f) continue;
    for (const RocPoint& right : pts) {
      if (right.fpr < f) continue;
      double t_ach, prob;
      if (right.fpr == left.fpr) {
        if (left.fpr != f) continue;
        double lo_t = std::min(left.tpr, right.tpr);
        double hi_t = std::max(left.tpr, right.tpr);
        t_ach = std::min(hi_t, std::max(lo_t, t));
        double span = right.tpr - left.tpr;
        prob = span == 0.0 ? 0.0 : (t_ach - left.tpr) / span;
      } else {
        prob = (f - left.fpr) / (right.fpr - left.fpr);  // weight on `right`
        t_ach = left.tpr + prob * (right.tpr - left.tpr);
      }
      double err = std::abs(t_ach - t);
      if (err < best.err) {
        // `left` is the stricter cutoff (fewer accepts); between the two
        // cutoffs an instance is accepted with the weight put on `right`.
        best.err = err;
        best.rule.upper = std::max(left.cutoff, right.cutoff);
        best.rule.lower = std::min(left.cutoff, right.cutoff);
        best.rule.probability = std::min(1.0, std::max(0.0, prob));
        best.fpr = f;
        best.tpr = t_ach;
      }
    }
  }
  return best;
}

}  // namespace

std::array<std::array<double, 2>, 2> eo_expected_rates(
    const GroupDecisionRule& rule, const ScoreSet& s) {
  std::array<std::array<double, 2>, 2> out{{{0.0, 0.0}, {0.0, 0.0}}};
  std::array<std::array<double, 2>, 2> denom{{{0.0, 0.0}, {0.0, 0.0}}};
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& g = rule.group[static_cast<std::size_t>(s.sensitive[i])];
    double p_accept;
    if (s.scores[i] > g.upper)
      p_accept = 1.0;
    else if (s.scores[i] > g.lower)
      p_accept = g.probability;
    else
      p_accept = 0.0;
    int cls = s.labels[i];  // 0 -> fpr slot, 1 -> tpr slot
    out[static_cast<std::size_t>(s.sensitive[i])][cls] += p_accept;
    denom[static_cast<std::size_t>(s.sensitive[i])][cls] += 1.0;
  }
  for (int g = 0; g < 2; ++g)
    for (int c = 0; c < 2; ++c) {
      if (denom[g][c] == 0.0) throw EmptyGroupClass("group lacks a class");
      out[g][c] /= denom[g][c];
    }
  return out;
}

GroupDecisionRule equalized_odds_fit(const ScoreSet& validation,
                                     const CostModel& cm, double epsilon) {
  if (validation.size() == 0) throw EmptyValidation("equalized odds fitting");
  validation.validate();
  cm.validate();
  if (epsilon < 0.0) throw ConfigError("epsilon must be non-negative");

  std::vector<double> sc[2];
  std::vector<int> lb[2];
  for (std::size_t i = 0; i < validation.size(); ++i) {
    sc[validation.sensitive[i]].push_back(validation.scores[i]);
    lb[validation.sensitive[i]].push_back(validation.labels[i]);
  }
  std::vector<RocPoint> pts[2], hull[2];
  for (int g = 0; g < 2; ++g) {
    pts[g] = roc_points(sc[g], lb[g]);
    hull[g] = upper_hull(pts[g]);
  }

  struct Target {
    double cost, f, t;
  };
  std::vector<Target> targets;
  const int grid = 100;
  for (int i = 0; i < grid; ++i) {
    double f = static_cast<double>(i) / static_cast<double>(grid - 1);
    double cap = std::min(hull_value(hull[0], f), hull_value(hull[1], f));
    for (int j = 0; j < grid; ++j) {
      double t = static_cast<double>(j) / static_cast<double>(grid - 1);
      if (t < f - 1e-12 || t > cap + 1e-9) continue;
      targets.push_back({f * cm.expected_b() + (1.0 - t) * cm.roi, f, t});
    }
  }
  if (targets.empty()) throw InfeasibleTarget("empty hull intersection");
  std::sort(targets.begin(), targets.end(), [](const Target& a, const Target& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    if (a.f != b.f) return a.f < b.f;
    return a.t < b.t;
  });

  const std::size_t max_attempts = std::min<std::size_t>(targets.size(), 400);
  for (std::size_t k = 0; k < max_attempts; ++k) {
    Realization r0 = realize(pts[0], targets[k].f, targets[k].t);
    Realization r1 = realize(pts[1], targets[k].f, targets[k].t);
    if (!std::isfinite(r0.err) || !std::isfinite(r1.err)) continue;
    GroupDecisionRule rule;
    rule.group[0] = r0.rule;
    rule.group[1] = r1.rule;
    rule.target_fpr = targets[k].f;
    rule.target_tpr = targets[k].t;
    auto rates = eo_expected_rates(rule, validation);
    if (std::abs(rates[0][0] - rates[1][0]) <= epsilon + 1e-9 &&
        std::abs(rates[0][1] - rates[1][1]) <= epsilon + 1e-9)
      return rule;
  }
  throw InfeasibleTarget("no grid target realizable within epsilon");
}

std::vector<int> equalized_odds_apply(const GroupDecisionRule& rule,
                                      const ScoreSet& s, std::uint64_t seed) {
  s.validate();
  Rng rng(seed);
  std::vector<int> out(s.size(), 0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& g = rule.group[static_cast<std::size_t>(s.sensitive[i])];
    if (s.scores[i] > g.upper)
      out[i] = 1;
    else if (s.scores[i] > g.lower)
      out[i] = rng.uniform() < g.probability ? 1 : 0;
    else
      out[i] = 0;
  }
  return out;
}

void GroupDecisionRule::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "fairscore-eo-rule 1\n" << std::hexfloat;
  for (const auto& g : group)
    out << g.lower << ' ' << g.upper << ' ' << g.probability << '\n';
  out << target_fpr << ' ' << target_tpr << '\n' << seed << '\n';
}

GroupDecisionRule GroupDecisionRule::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "fairscore-eo-rule" || version != 1)
    throw IoError("not a fairscore equalized-odds rule file: " + path);
  GroupDecisionRule rule;
  for (auto& g : rule.group) {
    g.lower = read_double(in);
    g.upper = read_double(in);
    g.probability = read_double(in);
  }
  rule.target_fpr = read_double(in);
  rule.target_tpr = read_double(in);
  if (!(in >> rule.seed)) throw IoError("truncated rule file");
  return rule;
}

namespace {

// Calibration input: the log-odds of the score. In this space the family
// sigma(-(a*S+b)) contains the identity (a = -1, b = 0), so already
// calibrated groups fit an (approximate) identity and keep their ECE.
double platt_input(double score) {
  double s = std::min(1.0 - 1e-12, std::max(1e-12, score));
  return std::log(s / (1.0 - s));
}

double platt_loss(const std::vector<double>& s, const std::vector<int>& y,
                  double a, double b) {
  double loss = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double z = a * s[i] + b;  // output is sigmoid(-z)
    // -log p = log(1+e^z) for y=1, -log(1-p) = log(1+e^-z) for y=0.
    double zz = y[i] == 1 ? z : -z;
    loss += zz > 0.0 ? zz + std::log1p(std::exp(-zz)) : std::log1p(std::exp(zz));
  }
  return loss / static_cast<double>(s.size());
}

void platt_fit_group(const std::vector<double>& s, const std::vector<int>& y,
                     double& a, double& b) {
  bool has0 = false, has1 = false;
  for (int v : y) (v == 1 ? has1 : has0) = true;
  if (!has0 || !has1) throw EmptyGroupClass("platt group lacks a class");

  a = 0.0;
  b = 0.0;
  const double n = static_cast<double>(s.size());
  double loss = platt_loss(s, y, a, b);
  for (int iter = 0; iter < 100; ++iter) {
    // Gradient/Hessian of the mean log-loss in (a, b); p = sigmoid(-(a*s+b)).
    double ga = 0.0, gb = 0.0, haa = 0.0, hab = 0.0, hbb = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      double p = sigmoid(-(a * s[i] + b));
      double r = (y[i] - p) / n;  // d(mean loss)/dz_i
      ga += r * s[i];
      gb += r;
      double w = p * (1.0 - p) / n;
      haa += w * s[i] * s[i];
      hab += w * s[i];
      hbb += w;
    }
    if (std::max(std::abs(ga), std::abs(gb)) < 1e-10) break;
    haa += 1e-6;
    hbb += 1e-6;
    double det = haa * hbb - hab * hab;
    double da = (hbb * ga - hab * gb) / det;
    double db = (haa * gb - hab * ga) / det;
    double step = 1.0;
    bool accepted = false;
    for (int h = 0; h < 60; ++h) {
      double na = a - step * da, nb = b - step * db;
      double nl = platt_loss(s, y, na, nb);
      if (nl <= loss) {
        a = na;
        b = nb;
        loss = nl;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  if (!std::isfinite(a) || !std::isfinite(b))
    throw NonFiniteLoss("platt parameters diverged");
}

}  // namespace

CalibrationMap platt_fit(const ScoreSet& validation) {
  if (validation.size() == 0) throw EmptyValidation("platt fitting");
  validation.validate();
  std::vector<double> sc[2];
  std::vector<int> lb[2];
  for (std::size_t i = 0; i < validation.size(); ++i) {
    sc[validation.sensitive[i]].push_back(platt_input(validation.scores[i]));
    lb[validation.sensitive[i]].push_back(validation.labels[i]);
  }
  CalibrationMap map;
  for (int g = 0; g < 2; ++g) {
    if (sc[g].empty()) throw EmptyGroupClass("platt group is empty");
    platt_fit_group(sc[g], lb[g], map.a[g], map.b[g]);
  }
  return map;
}

ScoreSet platt_apply(const CalibrationMap& map, const ScoreSet& s) {
  s.validate();
  ScoreSet out = s;
  for (std::size_t i = 0; i < s.size(); ++i) {
    int g = s.sensitive[i];
    out.scores[i] = sigmoid(-(map.a[g] * platt_input(s.scores[i]) + map.b[g]));
  }
  return out;
}

void CalibrationMap::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "fairscore-platt-map 1\n" << std::hexfloat;
  for (int g = 0; g < 2; ++g) out << a[g] << ' ' << b[g] << '\n';
}

CalibrationMap CalibrationMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "fairscore-platt-map" || version != 1)
    throw IoError("not a fairscore calibration map file: " + path);
  CalibrationMap map;
  for (int g = 0; g < 2; ++g) {
    map.a[g] = read_double(in);
    map.b[g] = read_double(in);
  }
  return map;
}

double expected_calibration_error(const std::vector<double>& scores,
                                  const std::vector<int>& labels, int bins) {
  if (scores.size() != labels.size() || scores.empty())
    throw DimensionMismatch("ece: empty or mismatched inputs");
  if (bins < 1) throw ConfigError("ece: bins must be positive");
  std::vector<double> sum_s(static_cast<std::size_t>(bins), 0.0);
  std::vector<double> sum_y(static_cast<std::size_t>(bins), 0.0);
  std::vector<double> count(static_cast<std::size_t>(bins), 0.0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    auto b = static_cast<std::size_t>(std::min(
        bins - 1, static_cast<int>(scores[i] * static_cast<double>(bins))));
    sum_s[b] += scores[i];
    sum_y[b] += static_cast<double>(labels[i]);
    count[b] += 1.0;
  }
  double ece = 0.0;
  const double n = static_cast<double>(scores.size());
  for (std::size_t b = 0; b < static_cast<std::size_t>(bins); ++b)
    if (count[b] > 0.0)
      ece += (count[b] / n) * std::abs(sum_s[b] / count[b] - sum_y[b] / count[b]);
  return ece;
}

}  // namespace fairscore
