#include "fairscore/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include "fairscore/csv.hpp"
#include "fairscore/rng.hpp"

namespace fairscore {

IngestSchema IngestSchema::from_toml(const TomlValue& cfg) {
  IngestSchema s;
  s.target = cfg.get_string("target", "");
  if (s.target.empty()) throw ConfigError("ingestion schema: missing 'target'");
  s.sensitive_column = cfg.get_string("sensitive.column", "");
  if (s.sensitive_column.empty())
    throw ConfigError("ingestion schema: missing 'sensitive.column'");
  s.sensitive_threshold = cfg.get_number("sensitive.threshold", 25.0);
  s.sensitive_is_binary = cfg.get_boolean("sensitive.binary", false);
  s.keep_sensitive_feature = cfg.get_boolean("sensitive.keep_feature", true);
  if (const TomlValue* cols = cfg.find("columns")) {
    for (const auto& [name, spec] : cols->entries())
      s.column_kinds[name] = spec.get_string("kind", "numeric");
  }
  return s;
}

namespace {

bool is_missing_token(const std::string& v) {
  return v.empty() || v == "NA" || v == "na" || v == "?" || v == "NaN" ||
         v == "nan";
}

bool parse_number(const std::string& v, double* out) {
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end == nullptr || *end != '\0' || v.empty()) return false;
  *out = x;
  return true;
}

}  // namespace

std::vector<int> derive_sensitive(const std::vector<double>& ages, double psi) {
  std::vector<int> out;
  out.reserve(ages.size());
  for (double a : ages) {
    if (!std::isfinite(a)) throw InvalidAge("non-finite age");
    out.push_back(a < psi ? 1 : 0);  // age == psi is privileged
  }
  return out;
}

Dataset load_csv(const std::string& path, const IngestSchema& schema) {
  CsvTable table = csv_read(path);
  if (table.rows.empty()) throw EmptyFile(path + " has no data rows");

  const int target_col = table.column(schema.target);
  if (target_col < 0) throw MissingColumn("target column '" + schema.target + "'");
  const int sensitive_col = table.column(schema.sensitive_column);
  if (sensitive_col < 0)
    throw MissingColumn("sensitive column '" + schema.sensitive_column + "'");

  Dataset ds;

  // Rows with a missing target are dropped before anything else.
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string& t = table.rows[r][static_cast<std::size_t>(target_col)];
    if (is_missing_token(t)) {
      ds.encoding_report.push_back("dropped row " + std::to_string(r + 2) +
                                   ": missing target");
      continue;
    }
    keep.push_back(r);
  }
  if (keep.empty()) throw EmptyFile(path + ": all targets missing");
  const std::size_t n = keep.size();

  for (std::size_t i = 0; i < n; ++i) {
    const std::string& t =
        table.rows[keep[i]][static_cast<std::size_t>(target_col)];
    double y;
    if (!parse_number(t, &y) || (y != 0.0 && y != 1.0))
      throw InvalidTarget("target value '" + t + "' outside {0,1}");
    ds.labels.push_back(static_cast<int>(y));
  }

  if (schema.sensitive_is_binary) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::string& v =
          table.rows[keep[i]][static_cast<std::size_t>(sensitive_col)];
      double x;
      if (!parse_number(v, &x) || (x != 0.0 && x != 1.0))
        throw InvalidAge("binary sensitive value '" + v + "' outside {0,1}");
      ds.sensitive.push_back(static_cast<int>(x));
    }
  } else {
    std::vector<double> ages(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string& v =
          table.rows[keep[i]][static_cast<std::size_t>(sensitive_col)];
      if (is_missing_token(v) || !parse_number(v, &ages[i]))
        throw InvalidAge("cannot parse age '" + v + "'");
    }
    ds.sensitive = derive_sensitive(ages, schema.sensitive_threshold);
    ds.encoding_report.push_back(
        "sensitive = 1[" + schema.sensitive_column + " < " +
        std::to_string(schema.sensitive_threshold) + "]");
  }

  // Encode features column by column, keeping the original column order;
  // missingness indicators are appended after all base columns.
  std::vector<std::vector<double>> cols;
  std::vector<std::string> names;
  std::vector<std::vector<double>> indicator_cols;
  std::vector<std::string> indicator_names;

  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const std::string& name = table.header[c];
    if (static_cast<int>(c) == target_col) continue;
    if (static_cast<int>(c) == sensitive_col && !schema.keep_sensitive_feature) {
      ds.encoding_report.push_back("excluded sensitive source column " + name);
      continue;
    }

    std::string kind;
    if (auto it = schema.column_kinds.find(name); it != schema.column_kinds.end()) {
      kind = it->second;
    } else {
      // Unlisted columns: numeric when every non-missing value parses.
      kind = "numeric";
      for (std::size_t i = 0; i < n; ++i) {
        const std::string& v = table.rows[keep[i]][c];
        double x;
        if (!is_missing_token(v) && !parse_number(v, &x)) {
          kind = "categorical";
          break;
        }
      }
      ds.encoding_report.push_back("inferred kind of " + name + ": " + kind);
    }

    if (kind == "numeric") {
      std::vector<double> col(n);
      std::vector<bool> missing(n, false);
      std::vector<double> present;
      for (std::size_t i = 0; i < n; ++i) {
        const std::string& v = table.rows[keep[i]][c];
        if (is_missing_token(v)) {
          missing[i] = true;
        } else if (!parse_number(v, &col[i]) || !std::isfinite(col[i])) {
          throw InvalidTarget("column " + name + ": cannot parse '" + v + "'");
        } else {
          present.push_back(col[i]);
        }
      }
      std::size_t n_missing = static_cast<std::size_t>(
          std::count(missing.begin(), missing.end(), true));
      if (n_missing > 0) {
        if (present.empty())
          throw InvalidTarget("column " + name + ": all values missing");
        std::sort(present.begin(), present.end());
        double median = present.size() % 2 == 1
                            ? present[present.size() / 2]
                            : 0.5 * (present[present.size() / 2 - 1] +
                                     present[present.size() / 2]);
        std::vector<double> ind(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
          if (missing[i]) {
            col[i] = median;
            ind[i] = 1.0;
          }
        indicator_cols.push_back(std::move(ind));
        indicator_names.push_back(name + "__was_missing");
        ds.encoding_report.push_back(
            name + ": imputed " + std::to_string(n_missing) +
            " missing with median " + std::to_string(median) + ", indicator added");
      }
      cols.push_back(std::move(col));
      names.push_back(name);
    } else if (kind == "categorical") {
      std::set<std::string> level_set;
      for (std::size_t i = 0; i < n; ++i) {
        const std::string& v = table.rows[keep[i]][c];
        level_set.insert(is_missing_token(v) ? std::string("NA") : v);
      }
      std::vector<std::string> levels(level_set.begin(), level_set.end());
      // First (lexicographically smallest) level is the dropped baseline.
      for (std::size_t l = 1; l < levels.size(); ++l) {
        std::vector<double> col(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          const std::string& v = table.rows[keep[i]][c];
          std::string lev = is_missing_token(v) ? std::string("NA") : v;
          if (lev == levels[l]) col[i] = 1.0;
        }
        cols.push_back(std::move(col));
        names.push_back(name + "=" + levels[l]);
      }
      ds.encoding_report.push_back(name + ": one-hot, " +
                                   std::to_string(levels.size()) +
                                   " levels, baseline '" + levels[0] + "'");
    } else {
      throw ConfigError("column " + name + ": unknown kind '" + kind + "'");
    }
  }

  for (std::size_t j = 0; j < indicator_cols.size(); ++j) {
    cols.push_back(std::move(indicator_cols[j]));
    names.push_back(indicator_names[j]);
  }
  if (cols.empty()) throw EmptyFile(path + ": no feature columns");

  ds.features.resize(static_cast<Eigen::Index>(n),
                     static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < n; ++i)
      ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          cols[j][i];
  ds.feature_names = std::move(names);
  ds.weights = Vector::Ones(static_cast<Eigen::Index>(n));
  ds.validate();
  return ds;
}

SplitPlan split_train_test(const Dataset& ds, double fraction,
                           std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw ConfigError("train fraction must lie in (0,1)");
  const std::size_t n = static_cast<std::size_t>(ds.rows());

  std::vector<std::vector<std::size_t>> cells(4);
  for (std::size_t i = 0; i < n; ++i)
    cells[static_cast<std::size_t>(2 * ds.labels[i] + ds.sensitive[i])]
        .push_back(i);

  SplitPlan plan;
  plan.seed = seed;
  plan.train_fraction = fraction;
  Rng base(seed);
  for (std::size_t cell = 0; cell < cells.size(); ++cell) {
    auto& idx = cells[cell];
    if (idx.empty()) continue;
    if (idx.size() < 2)
      throw DegenerateStratum("(y,x_a) cell " + std::to_string(cell) +
                              " has fewer than 2 members");
    Rng rng = base.fork(cell);
    rng.shuffle(idx);
    auto train_count = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(idx.size())));
    train_count = std::min(std::max<std::size_t>(train_count, 1), idx.size() - 1);
    for (std::size_t i = 0; i < idx.size(); ++i)
      (i < train_count ? plan.train_indices : plan.test_indices)
          .push_back(idx[i]);
  }
  std::sort(plan.train_indices.begin(), plan.train_indices.end());
  std::sort(plan.test_indices.begin(), plan.test_indices.end());
  return plan;
}

FoldPlan make_folds(std::size_t n_train, int k, const std::vector<int>& strata,
                    std::uint64_t seed) {
  if (k < 2) throw ConfigError("k must be >= 2");
  if (static_cast<std::size_t>(k) > n_train)
    throw TooManyFolds("k = " + std::to_string(k) + " exceeds n_train = " +
                       std::to_string(n_train));
  if (strata.size() != n_train)
    throw DimensionMismatch("strata length != n_train");

  std::map<int, std::vector<std::size_t>> by_stratum;
  for (std::size_t i = 0; i < n_train; ++i) by_stratum[strata[i]].push_back(i);

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(n_train, -1);
  Rng base(seed);
  std::size_t offset = 0;
  std::uint64_t salt = 0;
  for (auto& [sid, idx] : by_stratum) {
    Rng rng = base.fork(salt++);
    rng.shuffle(idx);
    for (std::size_t i = 0; i < idx.size(); ++i)
      plan.assignments[idx[i]] = static_cast<int>((offset + i) % static_cast<std::size_t>(k));
    offset += idx.size();
  }
  return plan;
}

std::vector<std::size_t> FoldPlan::fold_members(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::fold_complement(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] != fold) out.push_back(i);
  return out;
}

}  // namespace fairscore
