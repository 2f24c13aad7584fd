#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fairscore/dataset.hpp"
#include "fairscore/profit.hpp"
#include "fairscore/synth.hpp"
#include "fairscore/toml.hpp"

namespace fairscore {

struct DatasetSpec {
  std::string id = "synthetic";
  std::string kind = "synthetic";  // "synthetic" | "csv"
  std::string path;                // csv file
  std::string schema_path;         // ingest schema toml
  SynthSpec synth;
};

// Meta-parameter grids; defaults follow the shipped processor table.
struct ProcessorGrids {
  std::vector<std::string> list = {
      "reweighing",       "di_remover",     "prejudice_remover",
      "adversarial",      "meta_fair",      "reject_option",
      "equalized_odds",   "platt"};
  std::vector<double> di_lambdas = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> prejudice_etas = {1, 5, 15, 30, 50, 70, 100, 150};
  std::vector<double> adversarial_alphas = {0.1, 0.01, 0.001};
  int adversarial_epochs = 50;
  // Tolerated unfairness tau; the trained ratio target is sigma = 1 - tau.
  std::vector<double> meta_fair_taus = {0.05, 0.10, 0.15, 0.20, 0.25, 0.30};
  std::vector<double> reject_bounds = {0.1, 0.2, 0.3};  // symmetric [-b, b]
  int reject_thetas = 100;
  double eo_epsilon = 0.02;
};

struct LearnerGrids {
  std::vector<std::string> kinds = {"logistic", "network"};
  std::vector<double> logistic_l2 = {0.0, 0.001, 0.01};
  std::vector<double> network_hidden = {5, 10, 15};
  std::vector<double> network_decay = {0.1, 0.5, 1.0, 1.5, 2.0};
  int logistic_iterations = 1000;
  int network_epochs = 1000;
};

struct ExperimentConfig {
  std::vector<DatasetSpec> datasets;
  ProcessorGrids processors;
  LearnerGrids learners;
  CostModel cost;
  std::uint64_t seed = 42;
  int folds = 5;
  int inner_folds = 4;
  double train_fraction = 0.6;
  int jobs = 1;
  std::string output_dir = "out";

  static ExperimentConfig from_toml(const TomlValue& cfg);
  void validate() const;
};

// All violations with their key paths; empty when the config is valid.
std::vector<std::string> config_problems(const ExperimentConfig& cfg);

// One evaluation cell. Metrics are test-set values at the operating cutoff;
// errored cells keep the typed error text and leave metrics unset.
struct ResultRecord {
  std::string dataset;
  std::string processor;  // "unconstrained" for the baseline
  std::string learner;    // learner kind, or "self" for in-processors
  int fold = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::string params;  // chosen meta-parameters, "k=v;k=v"

  double auc = 0.0;
  double profit_raw = 0.0;
  std::optional<double> profit_normalized;
  double acceptance = 0.0;
  double ind = 0.0;
  double sp = 0.0;
  double sf = 0.0;
};

// Full protocol: 60/40 stratified split, outer k-fold CV, nested learner
// tuning by expected profit, processor application and common-test-set
// evaluation. Cells never abort the run; errors land in their records.
// Records come back in canonical (dataset, fold, processor, learner) order
// regardless of cfg.jobs.
std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg);

struct GainRow {
  std::string processor;
  int cells = 0;
  // metric -> mean gain; positive = improvement (fairness signs flipped).
  std::map<std::string, double> gains;
  // metric -> true when reported as an absolute difference because the
  // baseline magnitude fell under 1e-6.
  std::map<std::string, bool> absolute;
};

std::vector<GainRow> aggregate_gains(const std::vector<ResultRecord>& records);

// Spearman correlation with midrank ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

// Metric names: auc, profit_raw, acceptance, ind, sp, sf. Computed per
// dataset over its ok records, averaged across datasets; fairness metrics
// enter with inverted sign.
std::vector<std::vector<double>> rank_correlation(
    const std::vector<ResultRecord>& records,
    const std::vector<std::string>& metrics);

// Indices of non-dominated points (first objective maximized, second
// minimized), sorted by the first objective descending.
std::vector<std::size_t> pareto_frontier(
    const std::vector<std::pair<double, double>>& points);

// Frontier over ok records with objectives (profit_raw max, sp min).
std::vector<std::size_t> pareto_frontier(
    const std::vector<ResultRecord>& records);

// Writes records.csv, records.json, gains.csv, correlations.csv and
// frontier.csv under out_dir. Returns the number of errored cells.
int emit_report(const std::vector<ResultRecord>& records,
                const std::string& out_dir);

// Re-ingests an emitted records.csv (round-trip safe).
std::vector<ResultRecord> read_records_csv(const std::string& path);

Dataset load_dataset(const DatasetSpec& spec);

}  // namespace fairscore
