#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <vector>

#include "fairscore/bench.hpp"
#include "fairscore/rng.hpp"

using namespace fairscore;

namespace {

ResultRecord rec(const std::string& dataset, const std::string& processor,
                 const std::string& learner, int fold) {
  ResultRecord r;
  r.dataset = dataset;
  r.processor = processor;
  r.learner = learner;
  r.fold = fold;
  r.ok = true;
  return r;
}

ExperimentConfig tiny_config() {
  ExperimentConfig cfg = ExperimentConfig::from_toml(toml_parse(""));
  cfg.datasets[0].synth.rows = 240;
  cfg.folds = 2;
  cfg.inner_folds = 2;
  cfg.learners.kinds = {"logistic"};
  cfg.learners.logistic_l2 = {0.0};
  cfg.learners.logistic_iterations = 150;
  cfg.processors.list = {"reweighing"};
  return cfg;
}

}  // namespace

TEST_CASE("experiment config from toml: defaults and overrides") {
  ExperimentConfig dflt = ExperimentConfig::from_toml(toml_parse(""));
  CHECK(dflt.seed == 42);
  CHECK(dflt.folds == 5);
  CHECK(dflt.inner_folds == 4);
  CHECK(dflt.train_fraction == doctest::Approx(0.6));
  CHECK(dflt.cost.roi == doctest::Approx(0.2664));
  CHECK(dflt.datasets.size() == 1);
  CHECK(dflt.datasets[0].kind == "synthetic");
  CHECK(dflt.processors.list.size() == 8);
  CHECK(dflt.processors.prejudice_etas.size() == 8);
  CHECK(dflt.learners.kinds.size() == 2);

  ExperimentConfig cfg = ExperimentConfig::from_toml(toml_parse(
      "[experiment]\n"
      "seed = 7\n"
      "folds = 3\n"
      "[cost]\n"
      "roi = 0.3\n"
      "[dataset]\n"
      "id = \"syn-a\"\n"
      "rows = 500\n"
      "base_rate_gap = 0.2\n"
      "[learners]\n"
      "kinds = [\"logistic\"]\n"
      "[processors]\n"
      "list = [\"reweighing\", \"platt\"]\n"
      "[processors.di_remover]\n"
      "lambdas = [0.25, 0.75]\n"));
  CHECK(cfg.seed == 7);
  CHECK(cfg.folds == 3);
  CHECK(cfg.cost.roi == doctest::Approx(0.3));
  CHECK(cfg.datasets[0].id == "syn-a");
  CHECK(cfg.datasets[0].synth.rows == 500);
  CHECK(cfg.datasets[0].synth.base_rate_gap == doctest::Approx(0.2));
  CHECK(cfg.learners.kinds == std::vector<std::string>{"logistic"});
  CHECK(cfg.processors.list ==
        std::vector<std::string>{"reweighing", "platt"});
  CHECK(cfg.processors.di_lambdas == std::vector<double>{0.25, 0.75});
}

TEST_CASE("config problems are reported with their key paths") {
  ExperimentConfig cfg = ExperimentConfig::from_toml(toml_parse(""));
  CHECK(config_problems(cfg).empty());

  cfg.processors.di_lambdas = {1.3};
  cfg.folds = 1;
  cfg.learners.kinds = {"forest"};
  std::vector<std::string> bad = config_problems(cfg);
  REQUIRE(bad.size() == 3);
  auto mentions = [&](const std::string& needle) {
    for (const std::string& b : bad)
      if (b.find(needle) != std::string::npos) return true;
    return false;
  };
  CHECK(mentions("experiment.folds"));
  CHECK(mentions("processors.di_remover.lambdas"));
  CHECK(mentions("learners.kinds"));

  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("spearman: identity, reversal, and midrank ties") {
  std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<double> up = {10, 20, 30, 40, 50};
  std::vector<double> down = {5, 4, 3, 2, 1};
  CHECK(spearman(x, up) == doctest::Approx(1.0));
  CHECK(spearman(x, down) == doctest::Approx(-1.0));

  // Hand-computed midrank example: a = {1,2,2,3} -> ranks {1, 2.5, 2.5, 4};
  // b = {1,2,3,4} -> ranks {1,2,3,4}. Pearson of those ranks:
  // rho = 4.5 / sqrt(4.5 * 5) = 0.948683...
  std::vector<double> a = {1, 2, 2, 3};
  std::vector<double> b = {1, 2, 3, 4};
  CHECK(spearman(a, b) ==
        doctest::Approx(4.5 / std::sqrt(4.5 * 5.0)).epsilon(1e-12));

  std::vector<double> flat = {2, 2, 2, 2};
  CHECK(spearman(flat, b) == 0.0);  // constant ranking

  CHECK_THROWS_AS(spearman({1, 2}, {1, 2, 3}), DimensionMismatch);
  CHECK_THROWS_AS(spearman({1, 2}, {1, 2}), TooFewRecords);
}

TEST_CASE("pareto frontier: worked example and brute force") {
  // (profit, sp): the 0.03/0.20 point is dominated on both axes.
  std::vector<std::pair<double, double>> pts = {
      {0.05, 0.10}, {0.04, 0.05}, {0.03, 0.20}};
  std::vector<std::size_t> f = pareto_frontier(pts);
  REQUIRE(f.size() == 2);
  CHECK(f[0] == 0);  // sorted by profit descending
  CHECK(f[1] == 1);

  CHECK(pareto_frontier({{0.1, 0.2}}) == std::vector<std::size_t>{0});

  // Randomized comparison against the O(n^2) definition, duplicates included.
  Rng rng(91);
  for (int rep = 0; rep < 20; ++rep) {
    std::size_t n = 3 + rng.index(200);
    std::vector<std::pair<double, double>> p;
    for (std::size_t i = 0; i < n; ++i)
      p.push_back({std::floor(rng.uniform() * 8.0) / 8.0,
                   std::floor(rng.uniform() * 8.0) / 8.0});
    std::set<std::size_t> got;
    for (std::size_t i : pareto_frontier(p)) got.insert(i);
    std::set<std::size_t> want;
    for (std::size_t i = 0; i < n; ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < n && !dominated; ++j)
        dominated = p[j].first >= p[i].first && p[j].second <= p[i].second &&
                    (p[j].first > p[i].first || p[j].second < p[i].second);
      if (!dominated) want.insert(i);
    }
    CHECK(got == want);

    // Idempotence: the frontier of the frontier is itself.
    std::vector<std::pair<double, double>> sub;
    for (std::size_t i : got) sub.push_back(p[i]);
    CHECK(pareto_frontier(sub).size() == sub.size());
  }
}

TEST_CASE("aggregate gains: exact baselines, sign flips, absolute fallback") {
  std::vector<ResultRecord> rs;
  ResultRecord base = rec("d", "unconstrained", "logistic", 0);
  base.auc = 0.8;
  base.profit_raw = 0.0492;
  base.acceptance = 0.7;
  base.ind = 0.4;
  base.sp = 0.1;
  base.sf = 0.05;
  rs.push_back(base);

  ResultRecord same = rec("d", "reweighing", "logistic", 0);
  same.auc = base.auc;
  same.profit_raw = base.profit_raw;
  same.acceptance = base.acceptance;
  same.ind = base.ind;
  same.sp = base.sp;
  same.sf = base.sf;
  rs.push_back(same);

  std::vector<GainRow> g = aggregate_gains(rs);
  REQUIRE(g.size() == 1);
  CHECK(g[0].processor == "reweighing");
  CHECK(g[0].cells == 1);
  for (const auto& [m, v] : g[0].gains) CHECK(v == doctest::Approx(0.0));

  // ind 0.4 -> 0.1 is a 75% improvement; profit 0.0492 -> 0.0463 is -5.89%.
  rs[1].ind = 0.1;
  rs[1].profit_raw = 0.0463;
  g = aggregate_gains(rs);
  CHECK(g[0].gains.at("ind") == doctest::Approx(0.75));
  CHECK(!g[0].absolute.at("ind"));
  CHECK(g[0].gains.at("profit_raw") ==
        doctest::Approx((0.0463 - 0.0492) / 0.0492));
  CHECK(g[0].gains.at("profit_raw") == doctest::Approx(-0.0589).epsilon(1e-2));

  // Baseline fairness of zero switches that metric to absolute differences.
  rs[0].sp = 0.0;
  rs[1].sp = 0.03;
  g = aggregate_gains(rs);
  CHECK(g[0].absolute.at("sp"));
  CHECK(g[0].gains.at("sp") == doctest::Approx(-0.03));

  // "self" learners fall back to the pooled per-(dataset, fold) baseline.
  ResultRecord base2 = base;
  base2.learner = "network";
  base2.auc = 0.9;
  rs.push_back(base2);
  ResultRecord self = rec("d", "prejudice_remover", "self", 0);
  self.auc = 0.85;
  self.profit_raw = base.profit_raw;
  self.acceptance = base.acceptance;
  self.ind = base.ind;
  self.sp = 0.0;
  self.sf = base.sf;
  GainRow* pr = nullptr;
  rs.push_back(self);
  g = aggregate_gains(rs);
  for (GainRow& row : g)
    if (row.processor == "prejudice_remover") pr = &row;
  REQUIRE(pr != nullptr);
  // Pooled baseline auc = (0.8 + 0.9) / 2 = 0.85 -> zero gain.
  CHECK(pr->gains.at("auc") == doctest::Approx(0.0));

  std::vector<ResultRecord> no_base = {rs[1]};
  CHECK_THROWS_AS(aggregate_gains(no_base), MissingBaseline);
}

TEST_CASE("rank correlation: diagonal ones, fairness sign inversion") {
  std::vector<ResultRecord> rs;
  Rng rng(93);
  for (int i = 0; i < 12; ++i) {
    ResultRecord r = rec("d", "unconstrained", "logistic", i);
    r.auc = rng.uniform();
    r.profit_raw = r.auc + 0.05 * rng.uniform();  // strongly aligned
    r.acceptance = rng.uniform();
    r.ind = 1.0 - r.auc;  // unfairness falls as auc rises
    r.sp = rng.uniform();
    r.sf = rng.uniform();
    rs.push_back(r);
  }
  std::vector<std::string> metrics = {"auc", "profit_raw", "ind"};
  std::vector<std::vector<double>> c = rank_correlation(rs, metrics);
  for (std::size_t i = 0; i < metrics.size(); ++i)
    CHECK(c[i][i] == doctest::Approx(1.0));
  // ind enters with inverted sign, so auc vs ind is a perfect +1 here.
  CHECK(c[0][2] == doctest::Approx(1.0));
  CHECK(c[2][0] == doctest::Approx(1.0));

  std::vector<double> auc_col, ind_col;
  for (const ResultRecord& r : rs) {
    auc_col.push_back(r.auc);
    ind_col.push_back(-r.ind);
  }
  CHECK(c[0][2] == doctest::Approx(spearman(auc_col, ind_col)));
}

TEST_CASE("run_experiment: record shape, determinism, jobs invariance") {
  ExperimentConfig cfg = tiny_config();
  std::vector<ResultRecord> a = run_experiment(cfg);
  // Per fold: one unconstrained baseline per learner kind plus reweighing.
  REQUIRE(a.size() == 4);
  CHECK(a[0].processor == "unconstrained");
  CHECK(a[1].processor == "reweighing");
  CHECK(a[0].fold == 0);
  CHECK(a[2].fold == 1);
  for (const ResultRecord& r : a) {
    CHECK(r.ok);
    CHECK(r.learner == "logistic");
    CHECK(r.auc > 0.5);
  }

  std::vector<ResultRecord> b = run_experiment(cfg);
  ExperimentConfig par = cfg;
  par.jobs = 4;
  std::vector<ResultRecord> c = run_experiment(par);
  REQUIRE(b.size() == a.size());
  REQUIRE(c.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].seed == b[i].seed);
    CHECK(a[i].auc == b[i].auc);  // exact
    CHECK(a[i].profit_raw == b[i].profit_raw);
    CHECK(a[i].ind == b[i].ind);
    CHECK(a[i].auc == c[i].auc);  // jobs must not change a single bit
    CHECK(a[i].profit_raw == c[i].profit_raw);
    CHECK(a[i].sp == c[i].sp);
  }
}

TEST_CASE("run_experiment: in-processors report learner 'self'") {
  ExperimentConfig cfg = tiny_config();
  cfg.processors.list = {"prejudice_remover"};
  cfg.processors.prejudice_etas = {1, 15};
  std::vector<ResultRecord> rs = run_experiment(cfg);
  REQUIRE(rs.size() == 4);
  CHECK(rs[1].processor == "prejudice_remover");
  CHECK(rs[1].learner == "self");
  CHECK(rs[1].ok);
  CHECK(rs[1].params.find("eta=") != std::string::npos);
}

TEST_CASE("emit_report round trip through records.csv") {
  ExperimentConfig cfg = tiny_config();
  std::vector<ResultRecord> rs = run_experiment(cfg);
  ResultRecord broken = rec("synthetic", "equalized_odds", "logistic", 0);
  broken.ok = false;
  broken.error = "InfeasibleTarget: synthetic failure";
  rs.push_back(broken);

  const std::string dir = "/tmp/fairscore_report_test";
  std::filesystem::remove_all(dir);
  int errored = emit_report(rs, dir);
  CHECK(errored == 1);
  for (const char* f : {"records.csv", "records.json", "gains.csv",
                        "correlations.csv", "frontier.csv"})
    CHECK(std::filesystem::exists(dir + std::string("/") + f));

  std::vector<ResultRecord> back = read_records_csv(dir + "/records.csv");
  REQUIRE(back.size() == rs.size());
  for (std::size_t i = 0; i < rs.size(); ++i) {
    CHECK(back[i].dataset == rs[i].dataset);
    CHECK(back[i].processor == rs[i].processor);
    CHECK(back[i].learner == rs[i].learner);
    CHECK(back[i].fold == rs[i].fold);
    CHECK(back[i].seed == rs[i].seed);
    CHECK(back[i].ok == rs[i].ok);
    CHECK(back[i].error == rs[i].error);
    if (rs[i].ok) {
      CHECK(back[i].auc == rs[i].auc);  // %.17g survives the round trip
      CHECK(back[i].profit_raw == rs[i].profit_raw);
      CHECK(back[i].profit_normalized == rs[i].profit_normalized);
      CHECK(back[i].ind == rs[i].ind);
      CHECK(back[i].sp == rs[i].sp);
      CHECK(back[i].sf == rs[i].sf);
    }
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("frontier of records skips errored cells") {
  std::vector<ResultRecord> rs;
  ResultRecord a = rec("d", "unconstrained", "logistic", 0);
  a.profit_raw = 0.05;
  a.sp = 0.10;
  ResultRecord b = rec("d", "reweighing", "logistic", 0);
  b.profit_raw = 0.06;
  b.sp = 0.01;
  ResultRecord bad = rec("d", "platt", "logistic", 0);
  bad.ok = false;
  bad.profit_raw = 99.0;  // would dominate if it were counted
  rs = {a, b, bad};
  std::vector<std::size_t> f = pareto_frontier(rs);
  REQUIRE(f.size() == 1);
  CHECK(f[0] == 1);
}
