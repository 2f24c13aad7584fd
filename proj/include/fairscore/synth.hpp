#pragma once

#include <cstdint>

#include "fairscore/dataset.hpp"

namespace fairscore {

// Seeded generator for a biased credit dataset: group 1 (unprivileged) has a
// lower repayment base rate, and the features carry signal about both the
// label and the group so that every processor family has something to remove.
struct SynthSpec {
  std::size_t rows = 2000;
  int informative_features = 4;
  double group_fraction = 0.5;  // P(x_a = 1)
  double base_rate = 0.80;      // P(y = 1 | x_a = 0)
  double base_rate_gap = 0.25;  // base_rate - P(y = 1 | x_a = 1)
  double label_signal = 1.0;    // feature shift per unit label
  double group_signal = 0.6;    // feature shift per unit group (the bias)
  std::uint64_t seed = 0;

  void validate() const;
};

Dataset make_synthetic(const SynthSpec& spec);

}  // namespace fairscore
