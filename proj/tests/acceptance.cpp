// Acceptance harness: one pass/fail line per criterion, exit 1 on any
// failure. Criterion 2 is skipped (without failing) when the German credit
// CSV has not been fetched.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fairscore/bench.hpp"
#include "fairscore/data.hpp"
#include "fairscore/fairmetrics.hpp"
#include "fairscore/inproc.hpp"
#include "fairscore/learners.hpp"
#include "fairscore/postproc.hpp"
#include "fairscore/preproc.hpp"
#include "fairscore/profit.hpp"
#include "fairscore/rng.hpp"
#include "fairscore/synth.hpp"

using namespace fairscore;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::cout << "criterion " << id << ": " << (ok ? "PASS" : "FAIL") << " - "
            << detail << std::endl;
  if (!ok) ++failures;
}

void report_skip(int id, const std::string& detail) {
  std::cout << "criterion " << id << ": SKIP - " << detail << std::endl;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------- criterion 1

void criterion_metrics() {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(1001);
  double max_diff = 0.0;
  int compared = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    std::size_t n = 20 + rng.index(180);
    ScoreSet s;
    for (std::size_t i = 0; i < n; ++i) {
      s.scores.push_back(std::floor(rng.uniform() * 25.0) / 25.0);
      s.labels.push_back(rng.uniform() < 0.6 ? 1 : 0);
      s.sensitive.push_back(rng.uniform() < 0.4 ? 1 : 0);
    }
    double tau = std::floor(rng.uniform() * 25.0) / 25.0;

    double tp[2] = {0, 0}, fp[2] = {0, 0}, tn[2] = {0, 0}, fn[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      int g = s.sensitive[i];
      bool accept = s.scores[i] > tau;
      if (accept)
        (s.labels[i] == 1 ? tp[g] : fp[g]) += 1;
      else
        (s.labels[i] == 1 ? fn[g] : tn[g]) += 1;
    }
    bool both_groups = tp[0] + fp[0] + tn[0] + fn[0] > 0 &&
                       tp[1] + fp[1] + tn[1] + fn[1] > 0;
    if (!both_groups) continue;
    auto diff = [&](double a, double b) {
      max_diff = std::max(max_diff, std::abs(a - b));
    };

    double acc[2];
    for (int g = 0; g < 2; ++g)
      acc[g] = (tp[g] + fp[g]) / (tp[g] + fp[g] + tn[g] + fn[g]);
    diff(independence(s, tau), std::abs(acc[0] - acc[1]));
    AcceptanceRates ar = acceptance_rate(s, tau);
    diff(ar.group[0], acc[0]);
    diff(ar.group[1], acc[1]);

    if (fp[0] + tn[0] > 0 && fp[1] + tn[1] > 0 && fn[0] + tp[0] > 0 &&
        fn[1] + tp[1] > 0) {
      double fpr[2], fnr[2];
      for (int g = 0; g < 2; ++g) {
        fpr[g] = fp[g] / (fp[g] + tn[g]);
        fnr[g] = fn[g] / (fn[g] + tp[g]);
      }
      diff(separation(s, tau),
           0.5 * std::abs((fpr[1] - fpr[0]) + (fnr[1] - fnr[0])));
    }
    if (tp[0] + fp[0] > 0 && tp[1] + fp[1] > 0)
      diff(sufficiency(s, tau), std::abs(tp[0] / (tp[0] + fp[0]) -
                                         tp[1] / (tp[1] + fp[1])));

    double pos = tp[0] + tp[1] + fn[0] + fn[1];
    double neg = fp[0] + fp[1] + tn[0] + tn[1];
    if (pos > 0 && neg > 0) {
      double wins = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (s.labels[i] != 1) continue;
        for (std::size_t j = 0; j < n; ++j) {
          if (s.labels[j] != 0) continue;
          if (s.scores[i] > s.scores[j])
            wins += 1;
          else if (s.scores[i] == s.scores[j])
            wins += 0.5;
        }
      }
      diff(auc(s), wins / (pos * neg));
    }
    ++compared;
  }
  double secs = seconds_since(t0);
  report(1, compared > 900 && max_diff < 1e-12 && secs < 30.0,
         "metric oracle equivalence on " + std::to_string(compared) +
             " score sets, max abs diff " + fmt(max_diff) + ", " + fmt(secs) +
             " s");
}

// ---------------------------------------------------------------- criterion 2

void criterion_german() {
  const std::string csv = std::string(FAIRSCORE_SOURCE_DIR) + "/data/german.csv";
  if (!std::filesystem::exists(csv)) {
    report_skip(2, "data/german.csv not present; run scripts/fetch_german.py "
                   "to enable this check");
    return;
  }
  auto t0 = std::chrono::steady_clock::now();
  IngestSchema schema = IngestSchema::from_toml(toml_parse_file(
      std::string(FAIRSCORE_SOURCE_DIR) + "/configs/german.schema.toml"));
  Dataset ds = load_csv(csv, schema);
  double defaults = 0.0, young = 0.0;
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    defaults += ds.labels[i] == 0 ? 1.0 : 0.0;
    young += ds.sensitive[i];
  }
  double n = static_cast<double>(ds.labels.size());
  double default_rate = defaults / n;
  double young_rate = young / n;
  double secs = seconds_since(t0);
  report(2,
         ds.labels.size() == 1000 &&
             std::abs(default_rate - 0.300) < 5e-4 &&
             std::abs(young_rate - 0.190) < 5e-4 && secs < 5.0,
         "german data: n=" + std::to_string(ds.labels.size()) +
             ", default rate " + fmt(default_rate) + ", age<25 rate " +
             fmt(young_rate) + ", " + fmt(secs) + " s");
}

// ---------------------------------------------------------------- criterion 3

void criterion_profit() {
  CostModel cm;
  ScoreSet perfect;
  for (int i = 0; i < 100; ++i) {
    perfect.scores.push_back(i % 2 == 0 ? 1.0 : 0.0);
    perfect.labels.push_back(i % 2 == 0 ? 1 : 0);
    perfect.sensitive.push_back((i / 2) % 2);
  }
  double emp = expected_profit(perfect, cm).value;
  bool ok1 = std::abs(emp - 0.1332) < 1e-9;

  Rng rng(1003);
  ScoreSet s;
  for (int i = 0; i < 150; ++i) {
    s.scores.push_back(rng.uniform());
    s.labels.push_back(rng.uniform() < 0.55 ? 1 : 0);
    s.sensitive.push_back(rng.uniform() < 0.5 ? 1 : 0);
  }
  CostModel fine = cm;
  fine.quadrature_points = 2001;
  double drift = std::abs(expected_profit(s, cm).value -
                          expected_profit(s, fine).value);
  bool ok2 = drift < 1e-6;

  double tau = operating_cutoff(cm);
  bool ok3 = std::abs(tau - 0.275 / 0.8078) < 1e-6;
  report(3, ok1 && ok2 && ok3,
         "perfect-classifier EMP " + fmt(emp) + ", quadrature drift " +
             fmt(drift) + ", operating cutoff " + fmt(tau));
}

// ---------------------------------------------------------------- criterion 4

void criterion_reweigh() {
  Rng rng(1004);
  double max_diff = 0.0;
  int done = 0;
  for (int rep = 0; rep < 500; ++rep) {
    std::size_t n = 20 + rng.index(200);
    std::vector<int> labels, sens;
    for (std::size_t i = 0; i < n; ++i) {
      labels.push_back(rng.uniform() < 0.6 ? 1 : 0);
      sens.push_back(rng.uniform() < 0.4 ? 1 : 0);
    }
    labels[0] = 0; sens[0] = 0;
    labels[1] = 0; sens[1] = 1;
    labels[2] = 1; sens[2] = 0;
    labels[3] = 1; sens[3] = 1;

    Vector w = reweigh(labels, sens);
    double total = w.sum();
    double p_a[2] = {0, 0}, p_y[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      p_a[sens[i]] += 1.0 / static_cast<double>(n);
      p_y[labels[i]] += 1.0 / static_cast<double>(n);
    }
    for (int a = 0; a < 2; ++a)
      for (int y = 0; y < 2; ++y) {
        double cellw = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          if (sens[i] == a && labels[i] == y)
            cellw += w[static_cast<Eigen::Index>(i)];
        max_diff =
            std::max(max_diff, std::abs(cellw / total - p_a[a] * p_y[y]));
      }
    ++done;
  }
  report(4, done == 500 && max_diff < 1e-12,
         "reweighing factorization on 500 configurations, max abs diff " +
             fmt(max_diff));
}

// ---------------------------------------------------------------- criterion 5

void criterion_di() {
  Rng rng(1005);
  bool identity_ok = true, quantile_ok = true, rank_ok = true;
  for (int rep = 0; rep < 200; ++rep) {
    SynthSpec spec;
    spec.rows = 60 + rng.index(140);
    spec.seed = 5000 + static_cast<std::uint64_t>(rep);
    Dataset ds = make_synthetic(spec);

    Dataset same = di_remove(ds, 0.0, {0, 1, 2, 3});
    if (same.features != ds.features) identity_ok = false;

    Dataset full = di_remove(ds, 1.0, {0});
    std::vector<double> rep_g[2], orig_g[2];
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
      int g = ds.sensitive[static_cast<std::size_t>(i)];
      rep_g[g].push_back(full.features(i, 0));
      orig_g[g].push_back(ds.features(i, 0));
    }
    for (int g = 0; g < 2; ++g)
      for (std::size_t a = 0; a < orig_g[g].size(); ++a)
        for (std::size_t b = 0; b < orig_g[g].size(); ++b)
          if (orig_g[g][a] < orig_g[g][b] &&
              rep_g[g][a] > rep_g[g][b] + 1e-12)
            rank_ok = false;

    for (int g = 0; g < 2; ++g) std::sort(rep_g[g].begin(), rep_g[g].end());
    std::vector<double> levels;
    const int grid = 10;
    for (int q = 1; q < grid; ++q)
      levels.push_back(static_cast<double>(q) / grid);
    std::vector<double> q0 = group_quantile_curve(rep_g[0], levels);
    std::vector<double> q1 = group_quantile_curve(rep_g[1], levels);
    // Two grid steps of the pooled repaired distribution.
    std::vector<double> pooled = rep_g[0];
    pooled.insert(pooled.end(), rep_g[1].begin(), rep_g[1].end());
    std::sort(pooled.begin(), pooled.end());
    double span = pooled.back() - pooled.front() + 1e-12;
    for (std::size_t q = 0; q < levels.size(); ++q)
      if (std::abs(q0[q] - q1[q]) > 2.0 * span / grid) quantile_ok = false;
  }
  report(5, identity_ok && quantile_ok && rank_ok,
         std::string("di remover on 200 datasets: identity ") +
             (identity_ok ? "exact" : "BROKEN") + ", quantile gap " +
             (quantile_ok ? "within 2 grid steps" : "EXCEEDED") + ", ranks " +
             (rank_ok ? "preserved" : "INVERTED"));
}

// ---------------------------------------------------------------- criterion 6

void criterion_reductions() {
  SynthSpec sp;
  sp.rows = 400;
  sp.seed = 1006;
  Dataset ds = make_synthetic(sp);

  LearnerSpec base;
  base.max_iterations = 300;
  PrejudiceSpec ps;
  ps.eta = 0.0;
  ps.base = base;
  TrainedModel pr = train_prejudice_remover(ds, ps);
  TrainedModel lg = train_logistic(ds, base);
  double prejudice_diff = std::abs(pr.intercept - lg.intercept);
  for (Eigen::Index j = 0; j < lg.coef.size(); ++j)
    prejudice_diff = std::max(prejudice_diff, std::abs(pr.coef[j] - lg.coef[j]));

  AdversarialSpec as;
  as.alpha = 0.0;
  as.epochs = 12;
  as.seed = 9;
  TrainedModel adv = train_adversarial(ds, as);
  LearnerSpec net;
  net.kind = LearnerKind::Network;
  net.hidden_size = as.hidden_size;
  net.batch_size = as.batch_size;
  net.max_iterations = as.epochs;
  net.seed = as.seed;
  TrainedModel plain = train_network(ds, net);
  adv.save("/tmp/fairscore_acc_adv.txt");
  plain.save("/tmp/fairscore_acc_net.txt");
  bool adversarial_identical =
      slurp("/tmp/fairscore_acc_adv.txt") == slurp("/tmp/fairscore_acc_net.txt");
  std::remove("/tmp/fairscore_acc_adv.txt");
  std::remove("/tmp/fairscore_acc_net.txt");

  MetaFairSpec ms;
  ms.sigma = 0.0;
  ms.base = base;
  MetaFairResult mf = train_meta_fair(ds, ms);
  LearnerSpec long_run = base;
  long_run.max_iterations = base.max_iterations * ms.stages;
  TrainedModel lg2 = train_logistic(ds, long_run);
  double meta_diff = std::abs(mf.model.intercept - lg2.intercept);
  for (Eigen::Index j = 0; j < lg2.coef.size(); ++j)
    meta_diff = std::max(meta_diff, std::abs(mf.model.coef[j] - lg2.coef[j]));

  report(6,
         prejudice_diff < 1e-8 && adversarial_identical && meta_diff < 1e-8,
         "reduction identities: prejudice eta=0 diff " + fmt(prejudice_diff) +
             ", adversarial alpha=0 bytes " +
             (adversarial_identical ? "identical" : "DIFFER") +
             ", meta-fair sigma=0 diff " + fmt(meta_diff));
}

// ---------------------------------------------------------------- criterion 7

void criterion_gradients() {
  Rng rng(1007);
  double worst = 0.0;

  // Logistic objective.
  {
    SynthSpec sp;
    sp.rows = 120;
    sp.seed = 71;
    Dataset ds = make_synthetic(sp);
    LearnerSpec spec;
    spec.l2_decay = 0.05;
    Vector mean, scale;
    Matrix x = standardize_features(ds.features, &mean, &scale, true);
    for (int rep = 0; rep < 20; ++rep) {
      Vector coef(x.cols());
      for (Eigen::Index j = 0; j < coef.size(); ++j)
        coef[j] = rng.uniform(-1, 1);
      double b = rng.uniform(-1, 1);
      Vector grad;
      double gb = 0.0;
      logistic_objective(ds, spec, coef, b, x, &grad, &gb);
      const double h = 1e-6;
      for (Eigen::Index j = 0; j < coef.size(); ++j) {
        Vector cp = coef, cm = coef;
        cp[j] += h;
        cm[j] -= h;
        double fd =
            (logistic_objective(ds, spec, cp, b, x, nullptr, nullptr) -
             logistic_objective(ds, spec, cm, b, x, nullptr, nullptr)) /
            (2 * h);
        worst = std::max(worst, std::abs(fd - grad[j]) /
                                    std::max(1e-6, std::abs(fd)));
      }
    }
  }

  // Network objective.
  {
    SynthSpec sp;
    sp.rows = 60;
    sp.seed = 72;
    Dataset ds = make_synthetic(sp);
    LearnerSpec spec;
    spec.kind = LearnerKind::Network;
    spec.l2_decay = 0.01;
    Vector mean, scale;
    Matrix x = standardize_features(ds.features, &mean, &scale, true);
    const Eigen::Index k = x.cols(), hid = 3;
    for (int rep = 0; rep < 20; ++rep) {
      NetworkParams p;
      p.w1.resize(k, hid);
      p.b1.resize(hid);
      p.w2.resize(hid);
      for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < hid; ++j) p.w1(i, j) = rng.uniform(-1, 1);
      for (Eigen::Index j = 0; j < hid; ++j) p.b1[j] = rng.uniform(-1, 1);
      for (Eigen::Index j = 0; j < hid; ++j) p.w2[j] = rng.uniform(-1, 1);
      p.b2 = rng.uniform(-1, 1);
      NetworkParams g;
      network_objective(ds, spec, x, p, &g);
      const double h = 1e-6;
      auto fd_at = [&](double* slot, double analytic) {
        double orig = *slot;
        *slot = orig + h;
        double up = network_objective(ds, spec, x, p, nullptr);
        *slot = orig - h;
        double dn = network_objective(ds, spec, x, p, nullptr);
        *slot = orig;
        double fd = (up - dn) / (2 * h);
        worst = std::max(worst,
                         std::abs(fd - analytic) / std::max(1e-6, std::abs(fd)));
      };
      fd_at(&p.w1(0, 0), g.w1(0, 0));
      fd_at(&p.b1[1], g.b1[1]);
      fd_at(&p.w2[2], g.w2[2]);
      fd_at(&p.b2, g.b2);
    }
  }

  // Prejudice-index penalty and meta-fair penalty (through the scores).
  const double tau = operating_cutoff(CostModel{});
  for (int rep = 0; rep < 20; ++rep) {
    std::size_t n = 40 + rng.index(40);
    std::vector<double> scores(n);
    std::vector<int> labels(n), sens(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = 0.05 + 0.9 * rng.uniform();
      labels[i] = rng.uniform() < 0.6 ? 1 : 0;
      sens[i] = rng.uniform() < 0.5 ? 1 : 0;
    }
    labels[0] = 0; sens[0] = 0;
    labels[1] = 1; sens[1] = 0;
    labels[2] = 0; sens[2] = 1;
    labels[3] = 1; sens[3] = 1;

    ScorePenalty pi_pen = prejudice_penalty(2.0, sens);
    ScorePenalty mf_pen = meta_fair_penalty(
        labels, sens, FairnessCriterion::Independence, 0.999, 0.05, 3.0, tau);
    for (const ScorePenalty& pen : {pi_pen, mf_pen}) {
      Vector grad = Vector::Zero(static_cast<Eigen::Index>(n));
      double v = pen(scores, grad);
      Vector dummy = Vector::Zero(static_cast<Eigen::Index>(n));
      const double h = 1e-5;
      for (std::size_t i = 0; i < 5; ++i) {
        std::vector<double> up = scores, dn = scores;
        up[i] += h;
        dn[i] -= h;
        double fd = (pen(up, dummy) - pen(dn, dummy)) / (2 * h);
        if (v == 0.0 && fd == 0.0) continue;  // inactive constraint
        worst = std::max(worst, std::abs(fd - grad[static_cast<Eigen::Index>(
                                                  i)]) /
                                    std::max(1e-6, std::abs(fd)));
      }
    }
  }

  report(7, worst < 1e-4,
         "gradient validation (logistic, network, PI, meta-fair), worst "
         "relative error " +
             fmt(worst));
}

// ---------------------------------------------------------------- criterion 8

void criterion_directional() {
  auto t0 = std::chrono::steady_clock::now();
  SynthSpec sp;
  sp.rows = 2000;
  sp.seed = 1008;
  Dataset full = make_synthetic(sp);
  SplitPlan plan = split_train_test(full, 0.6, 8001);
  Dataset train = full.subset(plan.train_indices);
  Dataset test = full.subset(plan.test_indices);
  CostModel cm;
  const double tau = operating_cutoff(cm);

  LearnerSpec base_spec;
  base_spec.max_iterations = 300;
  TrainedModel base = train_logistic(train, base_spec);
  ScoreSet base_test = base.score(test);
  ScoreSet base_train = base.score(train);
  double base_ind = independence(base_test, tau);
  double base_sp = separation(base_test, tau);

  std::vector<std::string> bad;

  // Reweighing: IND and SP both drop.
  {
    Dataset rw = train;
    rw.weights = reweigh(train.labels, train.sensitive);
    ScoreSet s = train_logistic(rw, base_spec).score(test);
    if (!(independence(s, tau) < base_ind)) bad.push_back("reweighing IND");
    if (!(separation(s, tau) < base_sp)) bad.push_back("reweighing SP");
  }

  // Disparate impact remover at full repair.
  {
    std::vector<std::size_t> cols = {0, 1, 2, 3};
    ScoreSet s = train_logistic(di_remove(train, 1.0, cols), base_spec)
                     .score(di_remove(test, 1.0, cols));
    if (!(independence(s, tau) < base_ind)) bad.push_back("di_remover IND");
  }

  // Prejudice remover at the strongest eta.
  {
    PrejudiceSpec ps;
    ps.eta = 150.0;
    ps.base = base_spec;
    ScoreSet s = train_prejudice_remover(train, ps).score(test);
    if (!(independence(s, tau) < base_ind))
      bad.push_back("prejudice_remover IND");
  }

  // Adversarial debiasing vs the plain network.
  {
    AdversarialSpec as;
    as.alpha = 0.1;
    as.epochs = 50;
    as.seed = 5;
    LearnerSpec net;
    net.kind = LearnerKind::Network;
    net.hidden_size = as.hidden_size;
    net.batch_size = as.batch_size;
    net.max_iterations = as.epochs;
    net.seed = as.seed;
    double net_ind = independence(train_network(train, net).score(test), tau);
    double adv_ind =
        independence(train_adversarial(train, as).score(test), tau);
    if (!(adv_ind < net_ind)) bad.push_back("adversarial IND");
  }

  // Meta-fair at a tight ratio target.
  {
    MetaFairSpec ms;
    ms.sigma = 0.95;
    ms.base = base_spec;
    ScoreSet s = train_meta_fair(train, ms).model.score(test);
    if (!(independence(s, tau) < base_ind)) bad.push_back("meta_fair IND");
  }

  // Reject option: IND and SP both drop.
  {
    RejectOptionResult r = reject_option_tune(
        base_train, -0.05, 0.05, FairnessCriterion::Independence, cm);
    ScoreSet s = reject_option_apply(base_test, r.theta);
    if (!(independence(s, tau) < base_ind)) bad.push_back("reject_option IND");
    if (!(separation(s, tau) < base_sp)) bad.push_back("reject_option SP");
  }

  // Equalized odds: expected rate gaps within epsilon on its own data.
  {
    GroupDecisionRule rule = equalized_odds_fit(base_train, cm, 0.02);
    auto rates = eo_expected_rates(rule, base_train);
    if (!(std::abs(rates[0][0] - rates[1][0]) <= 0.02 + 1e-9))
      bad.push_back("equalized_odds dFPR");
    if (!(std::abs(rates[0][1] - rates[1][1]) <= 0.02 + 1e-9))
      bad.push_back("equalized_odds dFNR");
  }

  // Platt: per-group ECE non-increasing, group-wise AUC untouched.
  {
    CalibrationMap map = platt_fit(base_train);
    ScoreSet cal = platt_apply(map, base_train);
    for (int g = 0; g < 2; ++g) {
      std::vector<double> raw_s, cal_s;
      std::vector<int> ys;
      ScoreSet raw_g, cal_g;
      for (std::size_t i = 0; i < base_train.size(); ++i) {
        if (base_train.sensitive[i] != g) continue;
        raw_s.push_back(base_train.scores[i]);
        cal_s.push_back(cal.scores[i]);
        ys.push_back(base_train.labels[i]);
        raw_g.scores.push_back(base_train.scores[i]);
        cal_g.scores.push_back(cal.scores[i]);
        raw_g.labels.push_back(base_train.labels[i]);
        cal_g.labels.push_back(base_train.labels[i]);
        raw_g.sensitive.push_back(static_cast<int>(raw_g.scores.size() % 2));
        cal_g.sensitive.push_back(static_cast<int>(cal_g.scores.size() % 2));
      }
      if (expected_calibration_error(cal_s, ys) >
          expected_calibration_error(raw_s, ys) + 1e-9)
        bad.push_back("platt ECE group " + std::to_string(g));
      if (std::abs(auc(cal_g) - auc(raw_g)) > 1e-12)
        bad.push_back("platt AUC group " + std::to_string(g));
    }
  }

  double secs = seconds_since(t0);
  std::string detail = "directional efficacy, baseline IND " + fmt(base_ind) +
                       " SP " + fmt(base_sp) + ", " + fmt(secs) + " s";
  if (!bad.empty()) {
    detail += "; violated:";
    for (const std::string& b : bad) detail += " " + b;
  }
  report(8, bad.empty() && secs < 180.0, detail);
}

// ------------------------------------------------------- criteria 9 and 12

std::vector<ResultRecord> desk_records;
double desk_seconds = 0.0;

void run_desk_experiment() {
  auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = ExperimentConfig::from_toml(toml_parse_file(
      std::string(FAIRSCORE_SOURCE_DIR) + "/configs/experiment.toml"));
  cfg.jobs = static_cast<int>(
      std::max(1u, std::min(8u, std::thread::hardware_concurrency())));
  desk_records = run_experiment(cfg);
  desk_seconds = seconds_since(t0);
}

void criterion_desk_run() {
  int errored = 0;
  std::set<std::string> procs;
  for (const ResultRecord& r : desk_records) {
    if (!r.ok) ++errored;
    procs.insert(r.processor);
  }
  report(12,
         errored == 0 && procs.size() == 9 && desk_seconds < 600.0 &&
             !desk_records.empty(),
         "end-to-end desk run: " + std::to_string(desk_records.size()) +
             " cells, " + std::to_string(errored) + " errored, " +
             std::to_string(procs.size()) + " processors incl. baseline, " +
             fmt(desk_seconds) + " s");
}

void criterion_correlation() {
  std::vector<double> ind_col, sp_col;
  for (const ResultRecord& r : desk_records)
    if (r.ok) {
      ind_col.push_back(r.ind);
      sp_col.push_back(r.sp);
    }
  if (ind_col.size() < 3) {
    report(9, false, "too few pooled records for the correlation check");
    return;
  }
  double rho = spearman(ind_col, sp_col);
  report(9, rho > 0.7,
         "pooled Spearman(IND, SP) = " + fmt(rho) + " over " +
             std::to_string(ind_col.size()) + " cells");
}

// --------------------------------------------------------------- criterion 10

void criterion_frontier() {
  Rng rng(1010);
  bool ok = true;
  for (int rep = 0; rep < 30 && ok; ++rep) {
    std::size_t n = 1 + rng.index(1000);
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < n; ++i)
      pts.push_back({std::floor(rng.uniform() * 16.0) / 16.0,
                     std::floor(rng.uniform() * 16.0) / 16.0});
    std::set<std::size_t> got;
    for (std::size_t i : pareto_frontier(pts)) got.insert(i);
    std::set<std::size_t> want;
    for (std::size_t i = 0; i < n; ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < n && !dominated; ++j)
        dominated = pts[j].first >= pts[i].first &&
                    pts[j].second <= pts[i].second &&
                    (pts[j].first > pts[i].first ||
                     pts[j].second < pts[i].second);
      if (!dominated) want.insert(i);
    }
    if (got != want) ok = false;

    std::vector<std::pair<double, double>> sub;
    for (std::size_t i : got) sub.push_back(pts[i]);
    if (pareto_frontier(sub).size() != sub.size()) ok = false;
  }
  report(10, ok, "pareto frontier vs O(n^2) dominance filter, idempotent");
}

// --------------------------------------------------------------- criterion 11

void criterion_cli_determinism() {
  namespace fs = std::filesystem;
  const std::string dir = "/tmp/fairscore_acc_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir + "/cfg.toml");
    cfg << "[experiment]\nseed = 11\nfolds = 2\ninner_folds = 2\n"
        << "[dataset]\nrows = 400\n"
        << "[learners]\nkinds = [\"logistic\"]\nlogistic_l2 = [0.0]\n"
        << "logistic_iterations = 150\n"
        << "[processors]\nlist = [\"reweighing\", \"reject_option\", "
        << "\"platt\"]\n";
  }
  auto run = [&](const std::string& out, int jobs) {
    std::string cmd = std::string("\"") + FAIRSCORE_CLI_PATH +
                      "\" run --config \"" + dir + "/cfg.toml\"" +
                      " --set experiment.output_dir=\"" + out + "\"" +
                      " --jobs " + std::to_string(jobs) + " > /dev/null";
    return std::system(cmd.c_str()) == 0;
  };
  bool ran = run(dir + "/a", 1) && run(dir + "/b", 1) && run(dir + "/c", 8);
  bool identical = ran;
  std::string mismatch;
  if (ran) {
    for (const char* f : {"records.csv", "records.json", "gains.csv",
                          "correlations.csv", "frontier.csv"}) {
      std::string a = slurp(dir + "/a/" + f);
      if (a.empty() || a != slurp(dir + "/b/" + f) ||
          a != slurp(dir + "/c/" + f)) {
        identical = false;
        mismatch += std::string(" ") + f;
      }
    }
  }
  fs::remove_all(dir);
  report(11, ran && identical,
         ran ? ("cli reports byte-identical across reruns and --jobs 1 vs 8" +
                (mismatch.empty() ? "" : "; mismatch:" + mismatch))
             : "cli run failed");
}

}  // namespace

int main() {
  criterion_metrics();
  criterion_german();
  criterion_profit();
  criterion_reweigh();
  criterion_di();
  criterion_reductions();
  criterion_gradients();
  criterion_directional();
  run_desk_experiment();     // shared by criteria 9 and 12
  criterion_correlation();
  criterion_frontier();
  criterion_cli_determinism();
  criterion_desk_run();
  if (failures > 0) {
    std::cout << failures << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all criteria satisfied" << std::endl;
  return 0;
}
