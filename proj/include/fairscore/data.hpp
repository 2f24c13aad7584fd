#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fairscore/dataset.hpp"
#include "fairscore/toml.hpp"

namespace fairscore {

// Ingestion config. Mirrors the TOML keys:
//   target = "..."
//   [sensitive] column = "age", threshold = 25, binary = false
//   [columns.<name>] kind = "numeric" | "categorical"
struct IngestSchema {
  std::string target;
  std::string sensitive_column;
  double sensitive_threshold = 25.0;
  bool sensitive_is_binary = false;
  // The raw sensitive source column stays in the feature matrix by default;
  // the unconstrained benchmark is allowed to use all available information.
  bool keep_sensitive_feature = true;
  std::map<std::string, std::string> column_kinds;

  static IngestSchema from_toml(const TomlValue& cfg);
};

// Loads a header-first CSV, one-hot encodes categoricals (first level
// dropped), imputes missing numerics with the column median plus a
// missingness indicator, drops rows with missing target, and derives the
// binary sensitive attribute.
Dataset load_csv(const std::string& path, const IngestSchema& schema);

// 1 iff age < psi.
std::vector<int> derive_sensitive(const std::vector<double>& ages, double psi);

struct SplitPlan {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::uint64_t seed = 0;
  double train_fraction = 0.6;
};

// Stratified by the joint (label, sensitive) cell; per-cell train counts are
// round(fraction * cell size). Deterministic given seed.
SplitPlan split_train_test(const Dataset& ds, double fraction,
                           std::uint64_t seed);

struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;  // fold id per training index
  std::uint64_t seed = 0;

  std::vector<std::size_t> fold_members(int fold) const;
  std::vector<std::size_t> fold_complement(int fold) const;
};

// Stratified k-fold assignment; per-stratum fold sizes differ by at most 1.
FoldPlan make_folds(std::size_t n_train, int k, const std::vector<int>& strata,
                    std::uint64_t seed);

}  // namespace fairscore
