#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairscore/preproc.hpp"
#include "fairscore/rng.hpp"
#include "fairscore/synth.hpp"

using namespace fairscore;

TEST_CASE("reweigh: factorization of the weighted joint distribution") {
  Rng rng(31);
  for (int rep = 0; rep < 50; ++rep) {
    std::size_t n = 20 + rng.index(200);
    std::vector<int> labels, sens;
    for (std::size_t i = 0; i < n; ++i) {
      labels.push_back(rng.uniform() < 0.6 ? 1 : 0);
      sens.push_back(rng.uniform() < 0.4 ? 1 : 0);
    }
    // Ensure all four cells occupied.
    if (n < 4) continue;
    labels[0] = 0; sens[0] = 0;
    labels[1] = 0; sens[1] = 1;
    labels[2] = 1; sens[2] = 0;
    labels[3] = 1; sens[3] = 1;

    Vector w = reweigh(labels, sens);
    double total = w.sum();
    double p_a[2] = {0, 0}, p_y[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      p_a[sens[i]] += 1.0;
      p_y[labels[i]] += 1.0;
    }
    for (int v = 0; v < 2; ++v) {
      p_a[v] /= static_cast<double>(n);
      p_y[v] /= static_cast<double>(n);
    }
    // Weighted joint equals the product of the unweighted marginals.
    for (int a = 0; a < 2; ++a)
      for (int y = 0; y < 2; ++y) {
        double cellw = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          if (sens[i] == a && labels[i] == y)
            cellw += w[static_cast<Eigen::Index>(i)];
        CHECK(std::abs(cellw / total - p_a[a] * p_y[y]) < 1e-12);
      }
  }
}

TEST_CASE("reweigh: hand-computed 2x2 example") {
  // 10 rows: group 0 has 4 (3 repaid), group 1 has 6 (3 repaid).
  std::vector<int> sens = {0, 0, 0, 0, 1, 1, 1, 1, 1, 1};
  std::vector<int> labels = {1, 1, 1, 0, 1, 1, 1, 0, 0, 0};
  Vector w = reweigh(labels, sens);
  // W(a=0,y=1) = P(a=0)P(y=1)/P(a=0,y=1) = (0.4*0.6)/0.3 = 0.8.
  CHECK(w[0] == doctest::Approx(0.8));
  // W(a=1,y=1) = (0.6*0.6)/0.3 = 1.2.
  CHECK(w[4] == doctest::Approx(1.2));
  // W(a=0,y=0) = (0.4*0.4)/0.1 = 1.6; W(a=1,y=0) = (0.6*0.4)/0.3 = 0.8.
  CHECK(w[3] == doctest::Approx(1.6));
  CHECK(w[7] == doctest::Approx(0.8));

  // Empty cell errors.
  std::vector<int> one_sided = {0, 0, 1, 1};
  std::vector<int> ys = {1, 1, 1, 0};
  CHECK_THROWS_AS(reweigh(ys, one_sided), EmptyCell);
}

TEST_CASE("resample: deterministic, positive weights required") {
  SynthSpec spec;
  spec.rows = 300;
  spec.seed = 8;
  Dataset ds = make_synthetic(spec);
  Vector w = Vector::Ones(300);
  w[5] = 50.0;

  Dataset a = resample(ds, w, 77);
  Dataset b = resample(ds, w, 77);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  CHECK(a.rows() == 300);
  for (Eigen::Index i = 0; i < a.rows(); ++i) CHECK(a.weights[i] == 1.0);

  // Heavily weighted row is overrepresented.
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    if (a.features.row(i) == ds.features.row(5)) ++hits;
  CHECK(hits > 10);

  Vector bad = Vector::Ones(300);
  bad[0] = 0.0;
  CHECK_THROWS_AS(resample(ds, bad, 1), ConfigError);
}

namespace {

Dataset two_group_numeric(const std::vector<double>& g0,
                          const std::vector<double>& g1) {
  Dataset ds;
  std::size_t n = g0.size() + g1.size();
  ds.features.resize(static_cast<Eigen::Index>(n), 1);
  ds.weights = Vector::Ones(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < g0.size(); ++i) {
    ds.features(static_cast<Eigen::Index>(i), 0) = g0[i];
    ds.sensitive.push_back(0);
    ds.labels.push_back(static_cast<int>(i % 2));
  }
  for (std::size_t i = 0; i < g1.size(); ++i) {
    ds.features(static_cast<Eigen::Index>(g0.size() + i), 0) = g1[i];
    ds.sensitive.push_back(1);
    ds.labels.push_back(static_cast<int>(i % 2));
  }
  ds.feature_names = {"x"};
  return ds;
}

}  // namespace

TEST_CASE("di remover: worked example {1,2,3} vs {11,12,13} -> {6,7,8}") {
  Dataset ds = two_group_numeric({1, 2, 3}, {11, 12, 13});
  Dataset out = di_remove(ds, 1.0, {0});
  CHECK(out.features(0, 0) == doctest::Approx(6.0));
  CHECK(out.features(1, 0) == doctest::Approx(7.0));
  CHECK(out.features(2, 0) == doctest::Approx(8.0));
  CHECK(out.features(3, 0) == doctest::Approx(6.0));
  CHECK(out.features(4, 0) == doctest::Approx(7.0));
  CHECK(out.features(5, 0) == doctest::Approx(8.0));
}

TEST_CASE("di remover: lambda 0 is the identity, bit-exact") {
  SynthSpec spec;
  spec.rows = 120;
  spec.seed = 12;
  Dataset ds = make_synthetic(spec);
  Dataset out = di_remove(ds, 0.0, {0, 1, 2, 3});
  CHECK(out.features == ds.features);
}

TEST_CASE("di remover: lambda 1 equalizes quantiles; ranks preserved") {
  Rng rng(13);
  for (int rep = 0; rep < 30; ++rep) {
    SynthSpec spec;
    spec.rows = 80 + rng.index(120);
    spec.seed = 1000 + static_cast<std::uint64_t>(rep);
    Dataset ds = make_synthetic(spec);
    Dataset out = di_remove(ds, 1.0, {0});

    std::vector<double> repaired[2], original[2];
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
      repaired[ds.sensitive[static_cast<std::size_t>(i)]].push_back(
          out.features(i, 0));
      original[ds.sensitive[static_cast<std::size_t>(i)]].push_back(
          ds.features(i, 0));
    }

    // Within-group rank preservation (weak order must not invert).
    for (int g = 0; g < 2; ++g)
      for (std::size_t a = 0; a < original[g].size(); ++a)
        for (std::size_t b = 0; b < original[g].size(); ++b)
          if (original[g][a] < original[g][b])
            CHECK(repaired[g][a] <= repaired[g][b] + 1e-12);

    // Group quantile functions coincide after full repair.
    for (int g = 0; g < 2; ++g) std::sort(repaired[g].begin(), repaired[g].end());
    std::vector<double> levels;
    for (int q = 1; q < 10; ++q) levels.push_back(q / 10.0);
    std::vector<double> q0 = group_quantile_curve(repaired[0], levels);
    std::vector<double> q1 = group_quantile_curve(repaired[1], levels);
    double span = repaired[0].back() - repaired[0].front() + 1e-12;
    for (std::size_t q = 0; q < levels.size(); ++q)
      CHECK(std::abs(q0[q] - q1[q]) / span < 0.15);
  }
}

TEST_CASE("di remover: blend is the convex combination") {
  Dataset ds = two_group_numeric({1, 2, 3}, {11, 12, 13});
  Dataset full = di_remove(ds, 1.0, {0});
  Dataset half = di_remove(ds, 0.5, {0});
  for (Eigen::Index i = 0; i < ds.rows(); ++i)
    CHECK(half.features(i, 0) ==
          doctest::Approx(0.5 * ds.features(i, 0) + 0.5 * full.features(i, 0)));
}

TEST_CASE("di remover: argument validation") {
  Dataset ds = two_group_numeric({1, 2, 3}, {11, 12, 13});
  CHECK_THROWS_AS(di_remove(ds, 1.4, {0}), ConfigError);
  CHECK_THROWS_AS(di_remove(ds, 0.5, {9}), DimensionMismatch);
  Dataset tiny = two_group_numeric({1, 2}, {5});
  CHECK_THROWS_AS(di_remove(tiny, 0.5, {0}), GroupTooSmall);
}
