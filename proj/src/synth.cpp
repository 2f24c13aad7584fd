#include "fairscore/synth.hpp"

#include <cmath>
#include <string>

#include "fairscore/rng.hpp"

namespace fairscore {

void SynthSpec::validate() const {
  if (rows < 10) throw ConfigError("synthetic: need at least 10 rows");
  if (informative_features < 1)
    throw ConfigError("synthetic: need at least 1 feature");
  if (group_fraction <= 0.0 || group_fraction >= 1.0)
    throw ConfigError("synthetic: group fraction must lie in (0,1)");
  if (base_rate <= 0.0 || base_rate >= 1.0)
    throw ConfigError("synthetic: base rate must lie in (0,1)");
  double minority_rate = base_rate - base_rate_gap;
  if (minority_rate <= 0.0 || minority_rate >= 1.0)
    throw ConfigError("synthetic: base rate gap leaves group 1 outside (0,1)");
}

namespace {

double gauss(Rng& rng) {
  // Box-Muller; one draw per call keeps the stream layout simple.
  double u1 = rng.uniform();
  double u2 = rng.uniform();
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace

Dataset make_synthetic(const SynthSpec& spec) {
  spec.validate();
  Rng rng = Rng(spec.seed).fork(0xda7a5e7);

  const auto n = static_cast<Eigen::Index>(spec.rows);
  const int k = spec.informative_features;
  Dataset ds;
  ds.features.resize(n, k);
  ds.labels.reserve(spec.rows);
  ds.sensitive.reserve(spec.rows);
  ds.weights = Vector::Ones(n);
  for (int j = 0; j < k; ++j) ds.feature_names.push_back("f" + std::to_string(j));

  for (Eigen::Index i = 0; i < n; ++i) {
    int a = rng.uniform() < spec.group_fraction ? 1 : 0;
    double rate = a == 1 ? spec.base_rate - spec.base_rate_gap : spec.base_rate;
    int y = rng.uniform() < rate ? 1 : 0;
    ds.sensitive.push_back(a);
    ds.labels.push_back(y);
    for (int j = 0; j < k; ++j) {
      // Alternating signs keep the features from being interchangeable;
      // decaying magnitude gives the learners a ranking to find. The group
      // term pulls group 1 against the label direction, so the features act
      // as a proxy penalizing the unprivileged group beyond its base rate.
      double sgn = (j % 2 == 0) ? 1.0 : -1.0;
      double scale = 1.0 / (1.0 + 0.5 * j);
      double mean = sgn * scale *
                    (spec.label_signal * y - spec.group_signal * a);
      ds.features(i, j) = mean + gauss(rng);
    }
  }
  ds.encoding_report.push_back("synthetic biased dataset, seed " +
                               std::to_string(spec.seed));
  return ds;
}

}  // namespace fairscore
