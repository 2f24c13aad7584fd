#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "fairscore/errors.hpp"

namespace fairscore {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Feature matrix + labels + sensitive attribute + instance weights.
// Unit of ingestion, splitting and training. Immutable by convention after
// construction; transforms return new copies.
struct Dataset {
  Matrix features;                         // n x k
  std::vector<int> labels;                 // {0,1}, 1 = repaid
  std::vector<int> sensitive;              // {0,1}, 1 = unprivileged
  Vector weights;                          // strictly positive
  std::vector<std::string> feature_names;  // size k
  std::vector<std::string> encoding_report;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index cols() const { return features.cols(); }

  void validate() const;

  // Row subset, preserving order of `idx`.
  Dataset subset(const std::vector<std::size_t>& idx) const;
};

// Predicted scores aligned with labels and sensitive attribute; the unit of
// all evaluation.
struct ScoreSet {
  std::vector<double> scores;  // in [0,1]
  std::vector<int> labels;
  std::vector<int> sensitive;

  std::size_t size() const { return scores.size(); }
  void validate() const;
};

inline void Dataset::validate() const {
  const auto n = static_cast<std::size_t>(features.rows());
  if (n < 1 || features.cols() < 1) throw Error("Dataset: empty");
  if (labels.size() != n || sensitive.size() != n ||
      static_cast<std::size_t>(weights.size()) != n)
    throw Error("Dataset: length mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw Error("Dataset: label not 0/1");
    if (sensitive[i] != 0 && sensitive[i] != 1)
      throw Error("Dataset: sensitive not 0/1");
    if (!(weights[static_cast<Eigen::Index>(i)] > 0.0) ||
        !std::isfinite(weights[static_cast<Eigen::Index>(i)]))
      throw Error("Dataset: non-positive or non-finite weight");
  }
  if (!features.allFinite()) throw Error("Dataset: non-finite feature value");
}

inline Dataset Dataset::subset(const std::vector<std::size_t>& idx) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(idx.size()), features.cols());
  out.weights.resize(static_cast<Eigen::Index>(idx.size()));
  out.labels.reserve(idx.size());
  out.sensitive.reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) =
        features.row(static_cast<Eigen::Index>(idx[r]));
    out.weights[static_cast<Eigen::Index>(r)] =
        weights[static_cast<Eigen::Index>(idx[r])];
    out.labels.push_back(labels[idx[r]]);
    out.sensitive.push_back(sensitive[idx[r]]);
  }
  out.feature_names = feature_names;
  out.encoding_report = encoding_report;
  return out;
}

inline void ScoreSet::validate() const {
  if (scores.size() != labels.size() || scores.size() != sensitive.size())
    throw Error("ScoreSet: length mismatch");
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i]) || scores[i] < 0.0 || scores[i] > 1.0)
      throw Error("ScoreSet: score out of [0,1]");
    if (labels[i] != 0 && labels[i] != 1) throw Error("ScoreSet: label not 0/1");
    if (sensitive[i] != 0 && sensitive[i] != 1)
      throw Error("ScoreSet: sensitive not 0/1");
  }
}

}  // namespace fairscore
