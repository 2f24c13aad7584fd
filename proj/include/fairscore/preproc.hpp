#pragma once

#include <cstdint>
#include <vector>

#include "fairscore/dataset.hpp"

namespace fairscore {

// Cell weight W(a,y) = P(a) * P(y) / P(a,y); the weighted joint distribution
// of (sensitive, label) then factorizes exactly.
Vector reweigh(const std::vector<int>& labels,
               const std::vector<int>& sensitive);

// Seeded bootstrap with probability proportional to weight.
Dataset resample(const Dataset& ds, const Vector& weights, std::uint64_t seed);

// Disparate impact remover. Per listed feature: within-group midpoint
// plotting-position quantiles, repaired value is the pointwise median
// distribution's quantile function, blended with lambda. Rank order within
// each group is preserved; labels and the sensitive column are untouched.
Dataset di_remove(const Dataset& ds, double lambda,
                  const std::vector<std::size_t>& numeric_columns);

// Group quantile function on a shared grid; exposed for tests.
std::vector<double> group_quantile_curve(const std::vector<double>& values,
                                         const std::vector<double>& levels);

}  // namespace fairscore
