#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fairscore/dataset.hpp"
#include "fairscore/inproc.hpp"
#include "fairscore/profit.hpp"

namespace fairscore {

// Score band [1 - theta, theta] of high uncertainty.
struct CriticalRegion {
  double theta = 0.6;  // in (0.5, 1)
  void validate() const;
};

// In the critical region, the unprivileged group (x_a = 1) is accepted and
// the privileged group rejected; scores are overwritten with 1/0 so every
// downstream metric sees consistent inputs. Outside the region scores are
// bit-identical.
ScoreSet reject_option_apply(const ScoreSet& s, double theta);

// Signed fairness statistic used by the reject-option bound:
// independence: acc1 - acc0; separation: 0.5*((FPR1-FPR0)+(FNR1-FNR0));
// sufficiency: PPV0 - PPV1.
double signed_fairness(const ScoreSet& s, FairnessCriterion criterion,
                       double tau);

struct RejectOptionResult {
  double theta = 0.0;
  bool satisfied = false;  // signed statistic landed inside the bound
  double stat = 0.0;       // post-adjustment signed fairness statistic
  double profit = 0.0;     // expected profit of the adjusted scores
};

// Grid of n_thetas equally spaced theta in (0.5, 1); among the feasible ones
// (post-adjustment statistic inside [bound_lo, bound_hi]) pick the profit
// maximizer, smallest theta on ties. If none qualifies, return the theta whose
// statistic is closest to the bound, flagged unsatisfied.
RejectOptionResult reject_option_tune(const ScoreSet& validation,
                                      double bound_lo, double bound_hi,
                                      FairnessCriterion criterion,
                                      const CostModel& cm, int n_thetas = 100);

// Per-group randomized threshold rule: accept above `upper`, reject at or
// below `lower`, otherwise accept with probability `probability`.
struct GroupDecisionRule {
  struct GroupRule {
    double lower = 0.0;
    double upper = 0.0;
    double probability = 0.0;
  };
  std::array<GroupRule, 2> group;
  double target_fpr = 0.0;
  double target_tpr = 0.0;
  std::uint64_t seed = 0;  // carried so audits replay exactly

  void save(const std::string& path) const;
  static GroupDecisionRule load(const std::string& path);
};

// Searches (FPR*, TPR*) targets on a 100x100 grid inside both groups' ROC
// upper-hull regions, realizes each by mixing two cutoffs per group, and
// picks the feasible target minimizing FPR* x E[B] + FNR* x C. The returned
// rule's expected rates differ across groups by at most epsilon.
GroupDecisionRule equalized_odds_fit(const ScoreSet& validation,
                                     const CostModel& cm, double epsilon);

// Expected (FPR, TPR) per group of the rule on the given scores, with the
// mixing coin taken in expectation. Exposed for the epsilon guarantee checks.
std::array<std::array<double, 2>, 2> eo_expected_rates(
    const GroupDecisionRule& rule, const ScoreSet& s);

// Seeded randomized application; identical decision vector for a fixed seed.
std::vector<int> equalized_odds_apply(const GroupDecisionRule& rule,
                                      const ScoreSet& s, std::uint64_t seed);

// Per-group sigmoid calibration 1 / (1 + exp(a*S + b)), where S is the
// log-odds of the incoming score so the family contains the identity map.
struct CalibrationMap {
  std::array<double, 2> a{0.0, 0.0};
  std::array<double, 2> b{0.0, 0.0};

  void save(const std::string& path) const;
  static CalibrationMap load(const std::string& path);
};

// Per-group damped Newton on the calibration log-loss; ridge 1e-6 on the
// Hessian, iteration cap 100, so separable groups still yield finite maps.
CalibrationMap platt_fit(const ScoreSet& validation);

ScoreSet platt_apply(const CalibrationMap& map, const ScoreSet& s);

// Expected calibration error over equal-width probability bins.
double expected_calibration_error(const std::vector<double>& scores,
                                  const std::vector<int>& labels,
                                  int bins = 10);

}  // namespace fairscore
