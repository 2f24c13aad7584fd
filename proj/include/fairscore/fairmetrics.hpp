#pragma once

#include <array>
#include <optional>
#include <utility>

#include "fairscore/dataset.hpp"

namespace fairscore {

// Per-group confusion counts at a cutoff. Acceptance is strict: score > tau.
// Positive class (y = 1, repaid) is the accepted/"good risk" outcome.
struct GroupCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t size() const { return tp + fp + tn + fn; }
  std::optional<double> fpr() const;  // fp / (fp + tn)
  std::optional<double> fnr() const;  // fn / (fn + tp)
  std::optional<double> ppv() const;  // tp / (tp + fp)
  std::optional<double> acceptance() const;  // (tp + fp) / size
};

struct GroupConfusion {
  std::array<GroupCounts, 2> group;  // indexed by sensitive value
};

GroupConfusion confusion(const ScoreSet& s, double tau);

// |acceptance(group 0) - acceptance(group 1)|.
double independence(const ScoreSet& s, double tau);

// 0.5 * |(FPR1 - FPR0) + (FNR1 - FNR0)|; signed sum as printed, so
// opposite-sign gaps can cancel. See separation_components.
double separation(const ScoreSet& s, double tau);

// (FPR1 - FPR0, FNR1 - FNR0) diagnostic so cancellation is detectable.
std::pair<double, double> separation_components(const ScoreSet& s, double tau);

// |PPV0 - PPV1|.
double sufficiency(const ScoreSet& s, double tau);

// Probability a random positive outranks a random negative, ties counted 1/2.
double auc(const ScoreSet& s);

struct AcceptanceRates {
  double overall = 0.0;
  std::array<double, 2> group{0.0, 0.0};
};
AcceptanceRates acceptance_rate(const ScoreSet& s, double tau);

}  // namespace fairscore
