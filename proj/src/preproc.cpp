#include "fairscore/preproc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairscore/rng.hpp"

namespace fairscore {

Vector reweigh(const std::vector<int>& labels,
               const std::vector<int>& sensitive) {
  if (labels.size() != sensitive.size() || labels.empty())
    throw DimensionMismatch("reweigh: label/sensitive length mismatch");
  const double n = static_cast<double>(labels.size());

  double cell[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < labels.size(); ++i)
    cell[sensitive[i]][labels[i]] += 1.0;
  for (int a = 0; a < 2; ++a)
    for (int y = 0; y < 2; ++y)
      if (cell[a][y] == 0.0)
        throw EmptyCell("(x_a=" + std::to_string(a) + ", y=" +
                        std::to_string(y) + ") is empty");

  double p_a[2] = {(cell[0][0] + cell[0][1]) / n, (cell[1][0] + cell[1][1]) / n};
  double p_y[2] = {(cell[0][0] + cell[1][0]) / n, (cell[0][1] + cell[1][1]) / n};

  double w[2][2];
  for (int a = 0; a < 2; ++a)
    for (int y = 0; y < 2; ++y)
      w[a][y] = p_a[a] * p_y[y] / (cell[a][y] / n);

  Vector out(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = w[sensitive[i]][labels[i]];
  return out;
}

Dataset resample(const Dataset& ds, const Vector& weights, std::uint64_t seed) {
  ds.validate();
  if (weights.size() != ds.rows())
    throw DimensionMismatch("resample: weight length mismatch");
  for (Eigen::Index i = 0; i < weights.size(); ++i)
    if (!(weights[i] > 0.0)) throw ConfigError("resample: non-positive weight");

  std::vector<double> cumulative(static_cast<std::size_t>(weights.size()));
  double total = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    total += weights[i];
    cumulative[static_cast<std::size_t>(i)] = total;
  }

  Rng rng(seed);
  std::vector<std::size_t> picks;
  picks.reserve(static_cast<std::size_t>(ds.rows()));
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    double u = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    picks.push_back(static_cast<std::size_t>(it - cumulative.begin()));
  }
  Dataset out = ds.subset(picks);
  out.weights = Vector::Ones(ds.rows());
  out.encoding_report.push_back("resampled with replacement, seed " +
                                std::to_string(seed));
  return out;
}

namespace {

// Midpoint plotting positions with midranks for ties: u_i = (rank_i - 0.5)/n.
std::vector<double> plotting_positions(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> u(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && v[order[j]] == v[order[i]]) ++j;
    double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t)
      u[order[t]] = (midrank - 0.5) / static_cast<double>(n);
    i = j;
  }
  return u;
}

}  // namespace

std::vector<double> group_quantile_curve(const std::vector<double>& values,
                                         const std::vector<double>& levels) {
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  std::vector<double> out;
  out.reserve(levels.size());
  for (double u : levels) {
    // Positions of sorted values are (j + 0.5)/n; interpolate, clamp at ends.
    double pos = u * static_cast<double>(n) - 0.5;
    if (pos <= 0.0) {
      out.push_back(sorted.front());
    } else if (pos >= static_cast<double>(n - 1)) {
      out.push_back(sorted.back());
    } else {
      auto lo = static_cast<std::size_t>(pos);
      double frac = pos - static_cast<double>(lo);
      out.push_back(sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]));
    }
  }
  return out;
}

Dataset di_remove(const Dataset& ds, double lambda,
                  const std::vector<std::size_t>& numeric_columns) {
  ds.validate();
  if (lambda < 0.0 || lambda > 1.0)
    throw ConfigError("repair level must lie in [0,1]");

  std::vector<std::size_t> group_rows[2];
  for (std::size_t i = 0; i < static_cast<std::size_t>(ds.rows()); ++i)
    group_rows[ds.sensitive[i]].push_back(i);
  for (int g = 0; g < 2; ++g)
    if (group_rows[g].size() < 2)
      throw GroupTooSmall("group " + std::to_string(g) +
                          " has fewer than 2 rows");

  Dataset out = ds;
  for (std::size_t col : numeric_columns) {
    if (col >= static_cast<std::size_t>(ds.cols()))
      throw DimensionMismatch("di_remove: column index out of range");

    std::vector<double> group_values[2];
    std::vector<double> group_levels[2];
    for (int g = 0; g < 2; ++g) {
      for (std::size_t r : group_rows[g])
        group_values[g].push_back(ds.features(static_cast<Eigen::Index>(r),
                                              static_cast<Eigen::Index>(col)));
      group_levels[g] = plotting_positions(group_values[g]);
    }

    for (int g = 0; g < 2; ++g) {
      // Median distribution: pointwise median of the two group quantile
      // functions, evaluated at this instance's within-group level.
      std::vector<double> q_own =
          group_quantile_curve(group_values[g], group_levels[g]);
      std::vector<double> q_other =
          group_quantile_curve(group_values[1 - g], group_levels[g]);
      for (std::size_t t = 0; t < group_rows[g].size(); ++t) {
        double repaired = 0.5 * (q_own[t] + q_other[t]);
        double original = group_values[g][t];
        out.features(static_cast<Eigen::Index>(group_rows[g][t]),
                     static_cast<Eigen::Index>(col)) =
            (1.0 - lambda) * original + lambda * repaired;
      }
    }
  }
  out.encoding_report.push_back("disparate impact repair, lambda " +
                                std::to_string(lambda));
  return out;
}

}  // namespace fairscore
