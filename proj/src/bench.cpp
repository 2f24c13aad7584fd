#include "fairscore/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <thread>

#include "fairscore/csv.hpp"
#include "fairscore/data.hpp"
#include "fairscore/fairmetrics.hpp"
#include "fairscore/inproc.hpp"
#include "fairscore/learners.hpp"
#include "fairscore/postproc.hpp"
#include "fairscore/preproc.hpp"
#include "fairscore/rng.hpp"

#include <json.hpp>

namespace fairscore {

namespace {

constexpr const char* kKnownProcessors[] = {
    "reweighing",     "di_remover",    "prejudice_remover", "adversarial",
    "meta_fair",      "reject_option", "equalized_odds",    "platt"};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  return Rng(base).fork(salt).next();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_toml(const TomlValue& cfg) {
  ExperimentConfig out;
  out.seed = static_cast<std::uint64_t>(cfg.get_number("experiment.seed", 42));
  out.folds = static_cast<int>(cfg.get_number("experiment.folds", 5));
  out.inner_folds =
      static_cast<int>(cfg.get_number("experiment.inner_folds", 4));
  out.train_fraction = cfg.get_number("experiment.train_fraction", 0.6);
  out.jobs = static_cast<int>(cfg.get_number("experiment.jobs", 1));
  out.output_dir = cfg.get_string("experiment.output_dir", "out");

  out.cost.roi = cfg.get_number("cost.roi", out.cost.roi);
  out.cost.p0 = cfg.get_number("cost.p0", out.cost.p0);
  out.cost.p1 = cfg.get_number("cost.p1", out.cost.p1);
  out.cost.quadrature_points = static_cast<int>(
      cfg.get_number("cost.quadrature_points", out.cost.quadrature_points));

  auto read_dataset = [&](const TomlValue& d) {
    DatasetSpec ds;
    ds.id = d.get_string("id", "synthetic");
    ds.kind = d.get_string("kind", "synthetic");
    ds.path = d.get_string("path", "");
    ds.schema_path = d.get_string("schema", "");
    ds.synth.rows =
        static_cast<std::size_t>(d.get_number("rows", 2000));
    ds.synth.informative_features =
        static_cast<int>(d.get_number("features", 4));
    ds.synth.group_fraction = d.get_number("group_fraction", 0.5);
    ds.synth.base_rate = d.get_number("base_rate", 0.80);
    ds.synth.base_rate_gap = d.get_number("base_rate_gap", 0.25);
    ds.synth.seed =
        static_cast<std::uint64_t>(d.get_number("seed", 0));
    out.datasets.push_back(ds);
  };
  if (const TomlValue* d = cfg.find("dataset")) {
    if (d->is_array())
      for (const TomlValue& item : d->items()) read_dataset(item);
    else
      read_dataset(*d);
  }
  if (out.datasets.empty()) out.datasets.push_back(DatasetSpec{});

  out.learners.kinds =
      cfg.get_string_array("learners.kinds", out.learners.kinds);
  out.learners.logistic_l2 =
      cfg.get_number_array("learners.logistic_l2", out.learners.logistic_l2);
  out.learners.network_hidden = cfg.get_number_array(
      "learners.network_hidden", out.learners.network_hidden);
  out.learners.network_decay =
      cfg.get_number_array("learners.network_decay", out.learners.network_decay);
  out.learners.logistic_iterations = static_cast<int>(cfg.get_number(
      "learners.logistic_iterations", out.learners.logistic_iterations));
  out.learners.network_epochs = static_cast<int>(
      cfg.get_number("learners.network_epochs", out.learners.network_epochs));

  out.processors.list =
      cfg.get_string_array("processors.list", out.processors.list);
  out.processors.di_lambdas = cfg.get_number_array(
      "processors.di_remover.lambdas", out.processors.di_lambdas);
  out.processors.prejudice_etas = cfg.get_number_array(
      "processors.prejudice_remover.etas", out.processors.prejudice_etas);
  out.processors.adversarial_alphas = cfg.get_number_array(
      "processors.adversarial.alphas", out.processors.adversarial_alphas);
  out.processors.adversarial_epochs = static_cast<int>(cfg.get_number(
      "processors.adversarial.epochs", out.processors.adversarial_epochs));
  out.processors.meta_fair_taus = cfg.get_number_array(
      "processors.meta_fair.taus", out.processors.meta_fair_taus);
  out.processors.reject_bounds = cfg.get_number_array(
      "processors.reject_option.bounds", out.processors.reject_bounds);
  out.processors.reject_thetas = static_cast<int>(cfg.get_number(
      "processors.reject_option.thetas", out.processors.reject_thetas));
  out.processors.eo_epsilon = cfg.get_number(
      "processors.equalized_odds.epsilon", out.processors.eo_epsilon);
  return out;
}

std::vector<std::string> config_problems(const ExperimentConfig& cfg) {
  std::vector<std::string> bad;
  if (cfg.folds < 2) bad.push_back("experiment.folds: must be >= 2");
  if (cfg.inner_folds < 2) bad.push_back("experiment.inner_folds: must be >= 2");
  if (!(cfg.train_fraction > 0.0) || !(cfg.train_fraction < 1.0))
    bad.push_back("experiment.train_fraction: out of (0,1)");
  if (cfg.jobs < 1) bad.push_back("experiment.jobs: must be >= 1");
  try {
    cfg.cost.validate();
  } catch (const Error& e) {
    bad.push_back(std::string("cost: ") + e.what());
  }
  if (cfg.datasets.empty()) bad.push_back("dataset: none configured");
  for (const DatasetSpec& d : cfg.datasets) {
    if (d.kind == "synthetic") {
      try {
        d.synth.validate();
      } catch (const Error& e) {
        bad.push_back("dataset." + d.id + ": " + e.what());
      }
    } else if (d.kind == "csv") {
      if (d.path.empty())
        bad.push_back("dataset." + d.id + ".path: missing");
      else if (!std::filesystem::exists(d.path))
        bad.push_back("dataset." + d.id + ".path: unreadable " + d.path);
      if (d.schema_path.empty())
        bad.push_back("dataset." + d.id + ".schema: missing");
      else if (!std::filesystem::exists(d.schema_path))
        bad.push_back("dataset." + d.id + ".schema: unreadable " +
                      d.schema_path);
    } else {
      bad.push_back("dataset." + d.id + ".kind: unknown '" + d.kind + "'");
    }
  }
  if (cfg.learners.kinds.empty()) bad.push_back("learners.kinds: empty grid");
  for (const std::string& k : cfg.learners.kinds)
    if (k != "logistic" && k != "network")
      bad.push_back("learners.kinds: unknown '" + k + "'");
  if (cfg.learners.logistic_l2.empty())
    bad.push_back("learners.logistic_l2: empty grid");
  if (cfg.learners.network_hidden.empty())
    bad.push_back("learners.network_hidden: empty grid");
  if (cfg.learners.network_decay.empty())
    bad.push_back("learners.network_decay: empty grid");
  for (const std::string& p : cfg.processors.list) {
    bool known = false;
    for (const char* k : kKnownProcessors) known = known || p == k;
    if (!known) bad.push_back("processors.list: unknown '" + p + "'");
  }
  for (double l : cfg.processors.di_lambdas)
    if (l < 0.0 || l > 1.0)
      bad.push_back("processors.di_remover.lambdas: " + fmt_short(l) +
                    " out of [0,1]");
  if (cfg.processors.di_lambdas.empty())
    bad.push_back("processors.di_remover.lambdas: empty grid");
  if (cfg.processors.prejudice_etas.empty())
    bad.push_back("processors.prejudice_remover.etas: empty grid");
  if (cfg.processors.adversarial_alphas.empty())
    bad.push_back("processors.adversarial.alphas: empty grid");
  if (cfg.processors.meta_fair_taus.empty())
    bad.push_back("processors.meta_fair.taus: empty grid");
  for (double t : cfg.processors.meta_fair_taus)
    if (t < 0.0 || t > 1.0)
      bad.push_back("processors.meta_fair.taus: " + fmt_short(t) +
                    " out of [0,1]");
  if (cfg.processors.reject_bounds.empty())
    bad.push_back("processors.reject_option.bounds: empty grid");
  if (cfg.processors.reject_thetas < 1)
    bad.push_back("processors.reject_option.thetas: must be >= 1");
  if (cfg.processors.eo_epsilon < 0.0)
    bad.push_back("processors.equalized_odds.epsilon: negative");
  return bad;
}

void ExperimentConfig::validate() const {
  std::vector<std::string> bad = config_problems(*this);
  if (!bad.empty()) {
    std::string msg = "invalid config:";
    for (const std::string& b : bad) msg += "\n  " + b;
    throw ConfigError(msg);
  }
}

Dataset load_dataset(const DatasetSpec& spec) {
  if (spec.kind == "synthetic") return make_synthetic(spec.synth);
  if (spec.kind == "csv") {
    TomlValue schema_cfg = toml_parse_file(spec.schema_path);
    return load_csv(spec.path, IngestSchema::from_toml(schema_cfg));
  }
  throw ConfigError("unknown dataset kind '" + spec.kind + "'");
}

namespace {

TrainedModel train_model(const Dataset& ds, const LearnerSpec& spec) {
  return spec.kind == LearnerKind::Logistic ? train_logistic(ds, spec)
                                            : train_network(ds, spec);
}

std::vector<int> joint_strata(const Dataset& ds) {
  std::vector<int> strata(ds.labels.size());
  for (std::size_t i = 0; i < ds.labels.size(); ++i)
    strata[i] = ds.labels[i] * 2 + ds.sensitive[i];
  return strata;
}

std::vector<LearnerSpec> learner_grid(const std::string& kind,
                                      const LearnerGrids& g) {
  std::vector<LearnerSpec> out;
  if (kind == "logistic") {
    for (double l2 : g.logistic_l2) {
      LearnerSpec s;
      s.kind = LearnerKind::Logistic;
      s.l2_decay = l2;
      s.max_iterations = g.logistic_iterations;
      out.push_back(s);
    }
  } else {
    for (double h : g.network_hidden)
      for (double d : g.network_decay) {
        LearnerSpec s;
        s.kind = LearnerKind::Network;
        s.hidden_size = static_cast<int>(h);
        s.l2_decay = d;
        s.max_iterations = g.network_epochs;
        out.push_back(s);
      }
  }
  return out;
}

std::string learner_params(const LearnerSpec& s) {
  if (s.kind == LearnerKind::Logistic) return "l2=" + fmt_short(s.l2_decay);
  return "hidden=" + std::to_string(s.hidden_size) +
         ";decay=" + fmt_short(s.l2_decay);
}

// Nested k-fold grid search maximizing mean expected profit.
LearnerSpec tune_learner(const Dataset& fit, const std::string& kind,
                         const LearnerGrids& grids, const CostModel& cm,
                         int inner_k, std::uint64_t seed) {
  std::vector<LearnerSpec> grid = learner_grid(kind, grids);
  FoldPlan inner = make_folds(static_cast<std::size_t>(fit.rows()), inner_k,
                              joint_strata(fit), derive_seed(seed, 1));
  LearnerSpec best = grid.front();
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    double total = 0.0;
    for (int f = 0; f < inner_k; ++f) {
      Dataset inner_fit = fit.subset(inner.fold_complement(f));
      Dataset inner_val = fit.subset(inner.fold_members(f));
      LearnerSpec spec = grid[gi];
      spec.seed = derive_seed(seed, 100 + static_cast<std::uint64_t>(f));
      TrainedModel m = train_model(inner_fit, spec);
      total += expected_profit(m.score(inner_val), cm).value;
    }
    double mean = total / static_cast<double>(inner_k);
    if (mean > best_score) {
      best_score = mean;
      best = grid[gi];
    }
  }
  return best;
}

void fill_metrics(ResultRecord& r, const ScoreSet& s, const CostModel& cm) {
  const double tau = operating_cutoff(cm);
  r.auc = auc(s);
  ProfitPerEur ppe = profit_per_eur(s, cm);
  r.profit_raw = ppe.raw;
  r.profit_normalized = ppe.normalized;
  r.acceptance = ppe.acceptance;
  r.ind = independence(s, tau);
  r.sp = separation(s, tau);
  r.sf = sufficiency(s, tau);
}

struct FoldTask {
  std::size_t dataset_index = 0;
  int fold = 0;
};

std::vector<ResultRecord> run_fold(const Dataset& train, const Dataset& test,
                                   const FoldPlan& plan, int fold,
                                   const ExperimentConfig& cfg,
                                   const std::string& dataset_id,
                                   std::uint64_t dataset_seed) {
  std::vector<ResultRecord> out;
  const CostModel& cm = cfg.cost;
  const std::uint64_t fold_seed =
      derive_seed(dataset_seed, 100 + static_cast<std::uint64_t>(fold));

  Dataset fit = train.subset(plan.fold_complement(fold));
  Dataset val = train.subset(plan.fold_members(fold));

  auto enabled = [&](const std::string& p) {
    return std::find(cfg.processors.list.begin(), cfg.processors.list.end(),
                     p) != cfg.processors.list.end();
  };
  auto cell = [&](const std::string& proc, const std::string& learner,
                  std::uint64_t seed, auto&& fn) {
    ResultRecord r;
    r.dataset = dataset_id;
    r.processor = proc;
    r.learner = learner;
    r.fold = fold;
    r.seed = seed;
    try {
      fn(r);
      r.ok = true;
    } catch (const Error& e) {
      r.ok = false;
      r.error = e.what();
    }
    out.push_back(std::move(r));
  };

  // Per-learner tuned spec, baseline model and its val/test scores.
  struct LearnerState {
    bool ok = false;
    std::string error;
    LearnerSpec tuned;
    TrainedModel model;
    ScoreSet val_scores;
    ScoreSet test_scores;
  };
  std::vector<LearnerState> states(cfg.learners.kinds.size());

  for (std::size_t li = 0; li < cfg.learners.kinds.size(); ++li) {
    const std::string& kind = cfg.learners.kinds[li];
    LearnerState& st = states[li];
    std::uint64_t seed = derive_seed(fold_seed, 10 + li);
    cell("unconstrained", kind, seed, [&](ResultRecord& r) {
      st.tuned = tune_learner(fit, kind, cfg.learners, cm, cfg.inner_folds,
                              derive_seed(seed, 1));
      st.tuned.seed = derive_seed(seed, 2);
      st.model = train_model(fit, st.tuned);
      st.val_scores = st.model.score(val);
      st.test_scores = st.model.score(test);
      st.ok = true;
      r.params = learner_params(st.tuned);
      fill_metrics(r, st.test_scores, cm);
    });
    if (!st.ok) st.error = out.back().error;
  }
  auto require_baseline = [&](std::size_t li) -> LearnerState& {
    if (!states[li].ok)
      throw MissingBaseline("unconstrained " + cfg.learners.kinds[li] +
                            " cell failed: " + states[li].error);
    return states[li];
  };

  // --- pre-processors (retrain the tuned learner on transformed data) ---
  if (enabled("reweighing")) {
    for (std::size_t li = 0; li < cfg.learners.kinds.size(); ++li) {
      std::uint64_t seed = derive_seed(fold_seed, 20 + li);
      cell("reweighing", cfg.learners.kinds[li], seed, [&](ResultRecord& r) {
        LearnerState& st = require_baseline(li);
        Dataset ds2 = fit;
        ds2.weights = fit.weights.cwiseProduct(
            reweigh(fit.labels, fit.sensitive));
        LearnerSpec spec = st.tuned;
        spec.seed = derive_seed(seed, 1);
        TrainedModel m = train_model(ds2, spec);
        r.params = learner_params(spec);
        fill_metrics(r, m.score(test), cm);
      });
    }
  }
  if (enabled("di_remover")) {
    std::vector<std::size_t> cols(static_cast<std::size_t>(fit.cols()));
    std::iota(cols.begin(), cols.end(), 0);
    for (std::size_t li = 0; li < cfg.learners.kinds.size(); ++li) {
      std::uint64_t seed = derive_seed(fold_seed, 30 + li);
      cell("di_remover", cfg.learners.kinds[li], seed, [&](ResultRecord& r) {
        LearnerState& st = require_baseline(li);
        double best_lambda = cfg.processors.di_lambdas.front();
        double best_profit = -std::numeric_limits<double>::infinity();
        for (double lambda : cfg.processors.di_lambdas) {
          Dataset rep_fit = di_remove(fit, lambda, cols);
          Dataset rep_val = di_remove(val, lambda, cols);
          LearnerSpec spec = st.tuned;
          spec.seed = derive_seed(seed, 1);
          TrainedModel m = train_model(rep_fit, spec);
          double p = expected_profit(m.score(rep_val), cm).value;
          if (p > best_profit) {
            best_profit = p;
            best_lambda = lambda;
          }
        }
        Dataset rep_fit = di_remove(fit, best_lambda, cols);
        Dataset rep_test = di_remove(test, best_lambda, cols);
        LearnerSpec spec = st.tuned;
        spec.seed = derive_seed(seed, 1);
        TrainedModel m = train_model(rep_fit, spec);
        r.params = "lambda=" + fmt_short(best_lambda) + ";" +
                   learner_params(spec);
        fill_metrics(r, m.score(rep_test), cm);
      });
    }
  }

  // --- in-processors (the model itself; learner id "self") ---
  if (enabled("prejudice_remover")) {
    std::uint64_t seed = derive_seed(fold_seed, 40);
    cell("prejudice_remover", "self", seed, [&](ResultRecord& r) {
      PrejudiceSpec best;
      double best_profit = -std::numeric_limits<double>::infinity();
      TrainedModel best_model;
      for (double eta : cfg.processors.prejudice_etas) {
        PrejudiceSpec ps;
        ps.eta = eta;
        ps.base.max_iterations = cfg.learners.logistic_iterations;
        ps.base.seed = derive_seed(seed, 1);
        TrainedModel m = train_prejudice_remover(fit, ps);
        double p = expected_profit(m.score(val), cm).value;
        if (p > best_profit) {
          best_profit = p;
          best = ps;
          best_model = m;
        }
      }
      r.params = "eta=" + fmt_short(best.eta);
      fill_metrics(r, best_model.score(test), cm);
    });
  }
  if (enabled("adversarial")) {
    std::uint64_t seed = derive_seed(fold_seed, 41);
    cell("adversarial", "self", seed, [&](ResultRecord& r) {
      double best_alpha = cfg.processors.adversarial_alphas.front();
      double best_profit = -std::numeric_limits<double>::infinity();
      TrainedModel best_model;
      for (double alpha : cfg.processors.adversarial_alphas) {
        AdversarialSpec as;
        as.alpha = alpha;
        as.epochs = cfg.processors.adversarial_epochs;
        as.seed = derive_seed(seed, 1);
        TrainedModel m = train_adversarial(fit, as);
        double p = expected_profit(m.score(val), cm).value;
        if (p > best_profit) {
          best_profit = p;
          best_alpha = alpha;
          best_model = m;
        }
      }
      r.params = "alpha=" + fmt_short(best_alpha);
      fill_metrics(r, best_model.score(test), cm);
    });
  }
  if (enabled("meta_fair")) {
    std::uint64_t seed = derive_seed(fold_seed, 42);
    cell("meta_fair", "self", seed, [&](ResultRecord& r) {
      double best_tau = cfg.processors.meta_fair_taus.front();
      double best_profit = -std::numeric_limits<double>::infinity();
      TrainedModel best_model;
      for (double tau : cfg.processors.meta_fair_taus) {
        MetaFairSpec ms;
        ms.criterion = FairnessCriterion::Independence;
        ms.sigma = 1.0 - tau;
        ms.base.max_iterations = cfg.learners.logistic_iterations;
        ms.base.seed = derive_seed(seed, 1);
        MetaFairResult res = train_meta_fair(fit, ms);
        double p = expected_profit(res.model.score(val), cm).value;
        if (p > best_profit) {
          best_profit = p;
          best_tau = tau;
          best_model = res.model;
        }
      }
      r.params = "tau=" + fmt_short(best_tau);
      fill_metrics(r, best_model.score(test), cm);
    });
  }

  // --- post-processors (fit on the validation fold's predictions) ---
  if (enabled("reject_option")) {
    for (std::size_t li = 0; li < cfg.learners.kinds.size(); ++li) {
      std::uint64_t seed = derive_seed(fold_seed, 50 + li);
      cell("reject_option", cfg.learners.kinds[li], seed, [&](ResultRecord& r) {
        LearnerState& st = require_baseline(li);
        RejectOptionResult best;
        double best_bound = 0.0;
        bool have = false;
        for (double b : cfg.processors.reject_bounds) {
          RejectOptionResult res = reject_option_tune(
              st.val_scores, -b, b, FairnessCriterion::Independence, cm,
              cfg.processors.reject_thetas);
          bool better = !have ||
                        (res.satisfied && !best.satisfied) ||
                        (res.satisfied == best.satisfied &&
                         res.profit > best.profit);
          if (better) {
            best = res;
            best_bound = b;
            have = true;
          }
        }
        r.params = "bound=" + fmt_short(best_bound) +
                   ";theta=" + fmt_short(best.theta);
        fill_metrics(r, reject_option_apply(st.test_scores, best.theta), cm);
      });
    }
  }
  if (enabled("equalized_odds")) {
    for (std::size_t li = 0; li < cfg.learners.kinds.size(); ++li) {
      std::uint64_t seed = derive_seed(fold_seed, 60 + li);
      cell("equalized_odds", cfg.learners.kinds[li], seed,
           [&](ResultRecord& r) {
             LearnerState& st = require_baseline(li);
             GroupDecisionRule rule = equalized_odds_fit(
                 st.val_scores, cm, cfg.processors.eo_epsilon);
             rule.seed = derive_seed(seed, 1);
             std::vector<int> dec =
                 equalized_odds_apply(rule, st.test_scores, rule.seed);
             ScoreSet s = st.test_scores;
             for (std::size_t i = 0; i < s.size(); ++i)
               s.scores[i] = static_cast<double>(dec[i]);
             r.params = "fpr=" + fmt_short(rule.target_fpr) +
                        ";tpr=" + fmt_short(rule.target_tpr);
             fill_metrics(r, s, cm);
           });
    }
  }
  if (enabled("platt")) {
    for (std::size_t li = 0; li < cfg.learners.kinds.size(); ++li) {
      std::uint64_t seed = derive_seed(fold_seed, 70 + li);
      cell("platt", cfg.learners.kinds[li], seed, [&](ResultRecord& r) {
        LearnerState& st = require_baseline(li);
        CalibrationMap map = platt_fit(st.val_scores);
        r.params = "a0=" + fmt_short(map.a[0]) + ";a1=" + fmt_short(map.a[1]);
        fill_metrics(r, platt_apply(map, st.test_scores), cm);
      });
    }
  }
  return out;
}

int processor_order(const std::string& p) {
  if (p == "unconstrained") return 0;
  int i = 1;
  for (const char* k : kKnownProcessors) {
    if (p == k) return i;
    ++i;
  }
  return i;
}

}  // namespace

std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();

  struct DatasetState {
    Dataset train;
    Dataset test;
    FoldPlan plan;
    std::string id;
    std::uint64_t seed = 0;
  };
  std::vector<DatasetState> dstates;
  for (const DatasetSpec& spec : cfg.datasets) {
    DatasetState st;
    st.id = spec.id;
    st.seed = derive_seed(cfg.seed, fnv1a(spec.id));
    Dataset full = load_dataset(spec);
    SplitPlan split =
        split_train_test(full, cfg.train_fraction, derive_seed(st.seed, 1));
    st.train = full.subset(split.train_indices);
    st.test = full.subset(split.test_indices);
    st.plan = make_folds(st.train.labels.size(), cfg.folds,
                         joint_strata(st.train), derive_seed(st.seed, 2));
    dstates.push_back(std::move(st));
  }

  std::vector<FoldTask> tasks;
  for (std::size_t d = 0; d < dstates.size(); ++d)
    for (int f = 0; f < cfg.folds; ++f) tasks.push_back({d, f});

  std::vector<std::vector<ResultRecord>> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const DatasetState& st = dstates[tasks[t].dataset_index];
      results[t] = run_fold(st.train, st.test, st.plan, tasks[t].fold, cfg,
                            st.id, st.seed);
    }
  };
  int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  std::vector<ResultRecord> out;
  for (std::vector<ResultRecord>& part : results)
    for (ResultRecord& r : part) out.push_back(std::move(r));
  std::sort(out.begin(), out.end(),
            [](const ResultRecord& a, const ResultRecord& b) {
              if (a.dataset != b.dataset) return a.dataset < b.dataset;
              if (a.fold != b.fold) return a.fold < b.fold;
              int pa = processor_order(a.processor);
              int pb = processor_order(b.processor);
              if (pa != pb) return pa < pb;
              return a.learner < b.learner;
            });
  return out;
}

namespace {

const std::vector<std::string> kMetricNames = {"auc", "profit_raw",
                                               "acceptance", "ind", "sp", "sf"};

double metric_value(const ResultRecord& r, const std::string& name) {
  if (name == "auc") return r.auc;
  if (name == "profit_raw") return r.profit_raw;
  if (name == "acceptance") return r.acceptance;
  if (name == "ind") return r.ind;
  if (name == "sp") return r.sp;
  if (name == "sf") return r.sf;
  throw ConfigError("unknown metric '" + name + "'");
}

bool is_fairness_metric(const std::string& name) {
  return name == "ind" || name == "sp" || name == "sf";
}

}  // namespace

std::vector<GainRow> aggregate_gains(const std::vector<ResultRecord>& records) {
  // Baselines keyed by dataset|fold|learner, plus a per-(dataset, fold) pool
  // for "self" learners.
  std::map<std::string, const ResultRecord*> exact;
  std::map<std::string, std::vector<const ResultRecord*>> pool;
  for (const ResultRecord& r : records) {
    if (r.processor != "unconstrained" || !r.ok) continue;
    std::string df = r.dataset + "|" + std::to_string(r.fold);
    exact[df + "|" + r.learner] = &r;
    pool[df].push_back(&r);
  }
  if (exact.empty()) throw MissingBaseline("no unconstrained records");

  struct Pair {
    double proc = 0.0, base = 0.0;
  };
  std::map<std::string, std::map<std::string, std::vector<Pair>>> acc;
  std::map<std::string, int> cells;
  for (const ResultRecord& r : records) {
    if (r.processor == "unconstrained" || !r.ok) continue;
    std::string df = r.dataset + "|" + std::to_string(r.fold);
    auto it = exact.find(df + "|" + r.learner);
    const ResultRecord* base_exact =
        it != exact.end() ? it->second : nullptr;
    auto pit = pool.find(df);
    if (base_exact == nullptr && (pit == pool.end() || pit->second.empty()))
      throw MissingBaseline("no baseline for " + df);
    ++cells[r.processor];
    for (const std::string& m : kMetricNames) {
      double b;
      if (base_exact != nullptr) {
        b = metric_value(*base_exact, m);
      } else {
        b = 0.0;
        for (const ResultRecord* p : pit->second) b += metric_value(*p, m);
        b /= static_cast<double>(pit->second.size());
      }
      acc[r.processor][m].push_back({metric_value(r, m), b});
    }
  }

  std::vector<GainRow> out;
  for (auto& [proc, metrics] : acc) {
    GainRow row;
    row.processor = proc;
    row.cells = cells[proc];
    for (auto& [m, pairs] : metrics) {
      double sign = is_fairness_metric(m) ? -1.0 : 1.0;
      bool absolute = false;
      for (const Pair& p : pairs)
        if (std::abs(p.base) < 1e-6) absolute = true;
      double total = 0.0;
      for (const Pair& p : pairs) {
        double diff = sign * (p.proc - p.base);
        total += absolute ? diff : diff / std::abs(p.base);
      }
      row.gains[m] = total / static_cast<double>(pairs.size());
      row.absolute[m] = absolute;
    }
    out.push_back(std::move(row));
  }
  return out;
}

namespace {

std::vector<double> midranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && v[order[j]] == v[order[i]]) ++j;
    double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) rank[order[t]] = mid;
    i = j;
  }
  return rank;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("spearman: size mismatch");
  if (a.size() < 3) throw TooFewRecords("spearman needs >= 3 points");
  std::vector<double> ra = midranks(a);
  std::vector<double> rb = midranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;  // a constant ranking
  return sab / std::sqrt(saa * sbb);
}

std::vector<std::vector<double>> rank_correlation(
    const std::vector<ResultRecord>& records,
    const std::vector<std::string>& metrics) {
  std::map<std::string, std::vector<const ResultRecord*>> per_dataset;
  for (const ResultRecord& r : records)
    if (r.ok) per_dataset[r.dataset].push_back(&r);
  if (per_dataset.empty()) throw TooFewRecords("no ok records");

  const std::size_t m = metrics.size();
  std::vector<std::vector<double>> mean(m, std::vector<double>(m, 0.0));
  for (const auto& [ds, recs] : per_dataset) {
    if (recs.size() < 3)
      throw TooFewRecords("dataset " + ds + " has fewer than 3 records");
    std::vector<std::vector<double>> cols(m);
    for (std::size_t k = 0; k < m; ++k) {
      double sign = is_fairness_metric(metrics[k]) ? -1.0 : 1.0;
      for (const ResultRecord* r : recs)
        cols[k].push_back(sign * metric_value(*r, metrics[k]));
    }
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        mean[i][j] += spearman(cols[i], cols[j]);
  }
  const double d = static_cast<double>(per_dataset.size());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) mean[i][j] /= d;
  return mean;
}

std::vector<std::size_t> pareto_frontier(
    const std::vector<std::pair<double, double>>& points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].first != points[b].first)
      return points[a].first > points[b].first;
    return points[a].second < points[b].second;
  });
  std::vector<std::size_t> frontier;
  double best_second = std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() &&
           points[order[j]].first == points[order[i]].first)
      ++j;
    double group_min = points[order[i]].second;  // sorted ascending in group
    if (group_min < best_second) {
      for (std::size_t t = i; t < j; ++t)
        if (points[order[t]].second == group_min)
          frontier.push_back(order[t]);
      best_second = group_min;
    }
    i = j;
  }
  return frontier;
}

std::vector<std::size_t> pareto_frontier(
    const std::vector<ResultRecord>& records) {
  std::vector<std::pair<double, double>> pts;
  std::vector<std::size_t> map;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].ok) continue;
    pts.push_back({records[i].profit_raw, records[i].sp});
    map.push_back(i);
  }
  std::vector<std::size_t> local = pareto_frontier(pts);
  std::vector<std::size_t> out;
  for (std::size_t idx : local) out.push_back(map[idx]);
  return out;
}

namespace {

std::vector<std::string> record_header() {
  return {"schema",  "dataset",    "processor",  "learner",
          "fold",    "seed",       "status",     "error",
          "params",  "auc",        "profit_raw", "profit_normalized",
          "acceptance", "ind",     "sp",         "sf"};
}

std::vector<std::string> record_row(const ResultRecord& r) {
  std::vector<std::string> row;
  row.push_back("1");
  row.push_back(r.dataset);
  row.push_back(r.processor);
  row.push_back(r.learner);
  row.push_back(std::to_string(r.fold));
  row.push_back(std::to_string(r.seed));
  row.push_back(r.ok ? "ok" : "error");
  row.push_back(r.error);
  row.push_back(r.params);
  if (r.ok) {
    row.push_back(fmt(r.auc));
    row.push_back(fmt(r.profit_raw));
    row.push_back(r.profit_normalized ? fmt(*r.profit_normalized) : "");
    row.push_back(fmt(r.acceptance));
    row.push_back(fmt(r.ind));
    row.push_back(fmt(r.sp));
    row.push_back(fmt(r.sf));
  } else {
    for (int i = 0; i < 7; ++i) row.push_back("");
  }
  return row;
}

}  // namespace

int emit_report(const std::vector<ResultRecord>& records,
                const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output dir " + out_dir);

  int errored = 0;
  for (const ResultRecord& r : records)
    if (!r.ok) ++errored;

  CsvTable rec_table;
  rec_table.header = record_header();
  for (const ResultRecord& r : records) rec_table.rows.push_back(record_row(r));
  csv_write(out_dir + "/records.csv", rec_table);

  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["errored_cells"] = errored;
  j["records"] = nlohmann::ordered_json::array();
  for (const ResultRecord& r : records) {
    nlohmann::ordered_json rj;
    rj["dataset"] = r.dataset;
    rj["processor"] = r.processor;
    rj["learner"] = r.learner;
    rj["fold"] = r.fold;
    rj["seed"] = r.seed;
    rj["status"] = r.ok ? "ok" : "error";
    rj["error"] = r.error;
    rj["params"] = r.params;
    if (r.ok) {
      rj["auc"] = r.auc;
      rj["profit_raw"] = r.profit_raw;
      if (r.profit_normalized)
        rj["profit_normalized"] = *r.profit_normalized;
      else
        rj["profit_normalized"] = nullptr;
      rj["acceptance"] = r.acceptance;
      rj["ind"] = r.ind;
      rj["sp"] = r.sp;
      rj["sf"] = r.sf;
    }
    j["records"].push_back(std::move(rj));
  }
  {
    std::ofstream out(out_dir + "/records.json");
    if (!out) throw IoError("cannot write " + out_dir + "/records.json");
    out << j.dump(2) << '\n';
  }

  CsvTable gains_table;
  gains_table.header = {"schema", "processor", "cells", "metric", "gain",
                        "mode"};
  bool have_baseline = false;
  for (const ResultRecord& r : records)
    if (r.processor == "unconstrained" && r.ok) have_baseline = true;
  if (have_baseline) {
    for (const GainRow& row : aggregate_gains(records))
      for (const std::string& m : kMetricNames) {
        auto it = row.gains.find(m);
        if (it == row.gains.end()) continue;
        gains_table.rows.push_back(
            {"1", row.processor, std::to_string(row.cells), m,
             fmt(it->second),
             row.absolute.at(m) ? "absolute" : "relative"});
      }
  }
  csv_write(out_dir + "/gains.csv", gains_table);

  CsvTable corr_table;
  corr_table.header = {"schema", "metric_row", "metric_col", "spearman"};
  bool corr_ok = true;
  std::vector<std::vector<double>> corr;
  try {
    corr = rank_correlation(records, kMetricNames);
  } catch (const Error&) {
    corr_ok = false;
  }
  if (corr_ok)
    for (std::size_t i = 0; i < kMetricNames.size(); ++i)
      for (std::size_t k = 0; k < kMetricNames.size(); ++k)
        corr_table.rows.push_back(
            {"1", kMetricNames[i], kMetricNames[k], fmt(corr[i][k])});
  csv_write(out_dir + "/correlations.csv", corr_table);

  CsvTable frontier_table;
  frontier_table.header = {"schema", "dataset", "processor",
                           "learner", "fold",    "profit_raw", "sp"};
  for (std::size_t idx : pareto_frontier(records)) {
    const ResultRecord& r = records[idx];
    frontier_table.rows.push_back({"1", r.dataset, r.processor, r.learner,
                                   std::to_string(r.fold), fmt(r.profit_raw),
                                   fmt(r.sp)});
  }
  csv_write(out_dir + "/frontier.csv", frontier_table);

  return errored;
}

std::vector<ResultRecord> read_records_csv(const std::string& path) {
  CsvTable t = csv_read(path);
  auto col = [&](const std::string& name) {
    int c = t.column(name);
    if (c < 0) throw IoError("records csv missing column '" + name + "'");
    return static_cast<std::size_t>(c);
  };
  std::size_t c_dataset = col("dataset"), c_processor = col("processor"),
              c_learner = col("learner"), c_fold = col("fold"),
              c_seed = col("seed"), c_status = col("status"),
              c_error = col("error"), c_params = col("params"),
              c_auc = col("auc"), c_praw = col("profit_raw"),
              c_pnorm = col("profit_normalized"), c_acc = col("acceptance"),
              c_ind = col("ind"), c_sp = col("sp"), c_sf = col("sf");
  auto num = [](const std::string& s) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
      throw IoError("bad numeric field '" + s + "'");
    return v;
  };
  std::vector<ResultRecord> out;
  for (const std::vector<std::string>& row : t.rows) {
    ResultRecord r;
    r.dataset = row[c_dataset];
    r.processor = row[c_processor];
    r.learner = row[c_learner];
    r.fold = static_cast<int>(num(row[c_fold]));
    r.seed = static_cast<std::uint64_t>(std::strtoull(row[c_seed].c_str(),
                                                      nullptr, 10));
    r.ok = row[c_status] == "ok";
    r.error = row[c_error];
    r.params = row[c_params];
    if (r.ok) {
      r.auc = num(row[c_auc]);
      r.profit_raw = num(row[c_praw]);
      if (!row[c_pnorm].empty()) r.profit_normalized = num(row[c_pnorm]);
      r.acceptance = num(row[c_acc]);
      r.ind = num(row[c_ind]);
      r.sp = num(row[c_sp]);
      r.sf = num(row[c_sf]);
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace fairscore
