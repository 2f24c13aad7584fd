#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fairscore/bench.hpp"
#include "fairscore/csv.hpp"
#include "fairscore/fairmetrics.hpp"
#include "fairscore/profit.hpp"
#include "fairscore/toml.hpp"

namespace {

using namespace fairscore;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;
  int jobs = 0;  // 0 = unset
  bool json = false;
  long long seed = -1;  // -1 = unset
};

TomlValue load_config(const CommonOpts& opts) {
  TomlValue root = opts.config_path.empty()
                       ? TomlValue::table()
                       : toml_parse_file(opts.config_path);
  for (const std::string& s : opts.sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + s + "'");
    root.set(s.substr(0, eq), toml_parse_scalar(s.substr(eq + 1)));
  }
  return root;
}

ExperimentConfig build_experiment(const CommonOpts& opts) {
  ExperimentConfig cfg = ExperimentConfig::from_toml(load_config(opts));
  if (opts.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed);
  if (opts.jobs > 0) {
    cfg.jobs = opts.jobs;
  } else if (const char* env = std::getenv("FAIRSCORE_JOBS")) {
    int j = std::atoi(env);
    if (j > 0) cfg.jobs = j;
  }
  return cfg;
}

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

int cmd_validate(const CommonOpts& opts) {
  ExperimentConfig cfg = build_experiment(opts);
  std::vector<std::string> bad = config_problems(cfg);
  if (!bad.empty()) {
    for (const std::string& b : bad) std::cout << "violation: " << b << "\n";
    return 1;
  }
  std::cout << "OK\n";
  std::cout << "effective: seed=" << cfg.seed << " folds=" << cfg.folds
            << " inner_folds=" << cfg.inner_folds
            << " train_fraction=" << cfg.train_fraction
            << " cost.roi=" << cfg.cost.roi << " cost.p0=" << cfg.cost.p0
            << " cost.p1=" << cfg.cost.p1 << " datasets=" << cfg.datasets.size()
            << " learners=" << cfg.learners.kinds.size()
            << " processors=" << cfg.processors.list.size() << "\n";
  return 0;
}

int cmd_run(const CommonOpts& opts) {
  ExperimentConfig cfg = build_experiment(opts);
  cfg.validate();
  std::vector<ResultRecord> records = run_experiment(cfg);
  int errored = emit_report(records, cfg.output_dir);

  std::cout << "records: " << records.size() << "\n";
  std::cout << "errored cells: " << errored << "\n";
  std::cout << "output: " << cfg.output_dir << "\n";
  std::cout << "processor            learner    folds  mean_profit  mean_ind\n";
  struct Agg {
    double profit = 0.0, ind = 0.0;
    int n = 0;
  };
  std::map<std::pair<std::string, std::string>, Agg> agg;
  for (const ResultRecord& r : records) {
    if (!r.ok) continue;
    Agg& a = agg[{r.processor, r.learner}];
    a.profit += r.profit_raw;
    a.ind += r.ind;
    a.n += 1;
  }
  for (const auto& [key, a] : agg) {
    std::printf("%-20s %-10s %5d  %11.6f  %8.4f\n", key.first.c_str(),
                key.second.c_str(), a.n, a.profit / a.n, a.ind / a.n);
  }
  return errored > 0 ? 2 : 0;
}

int cmd_audit(const CommonOpts& opts, const std::string& scores_path,
              const std::string& cutoff_flag) {
  CsvTable t = csv_read(scores_path);
  int cs = t.column("score"), cl = t.column("label"), ca = t.column("sensitive");
  if (cs < 0 || cl < 0 || ca < 0)
    throw IoError("audit csv needs header 'score,label,sensitive'");
  ScoreSet s;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    auto line = std::to_string(i + 2);  // header is line 1
    char* end = nullptr;
    double score = std::strtod(row[static_cast<std::size_t>(cs)].c_str(), &end);
    if (end == row[static_cast<std::size_t>(cs)].c_str() || *end != '\0')
      throw Error("line " + line + ": bad score");
    if (score < 0.0 || score > 1.0)
      throw Error("line " + line + ": score out of [0,1]");
    int label = std::atoi(row[static_cast<std::size_t>(cl)].c_str());
    int sens = std::atoi(row[static_cast<std::size_t>(ca)].c_str());
    if (label != 0 && label != 1)
      throw Error("line " + line + ": label not 0/1");
    if (sens != 0 && sens != 1)
      throw Error("line " + line + ": sensitive not 0/1");
    s.scores.push_back(score);
    s.labels.push_back(label);
    s.sensitive.push_back(sens);
  }
  CostModel cm;
  double tau = cutoff_flag == "auto" ? operating_cutoff(cm)
                                     : std::strtod(cutoff_flag.c_str(), nullptr);
  double v_ind = independence(s, tau);
  double v_sp = separation(s, tau);
  double v_sf = sufficiency(s, tau);
  double v_auc = auc(s);
  ProfitPerEur ppe = profit_per_eur(s, cm);
  double v_emp = expected_profit(s, cm).value;

  if (opts.json) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["n"] = s.size();
    j["cutoff"] = tau;
    j["ind"] = v_ind;
    j["sp"] = v_sp;
    j["sf"] = v_sf;
    j["auc"] = v_auc;
    j["profit_raw"] = ppe.raw;
    if (ppe.normalized)
      j["profit_normalized"] = *ppe.normalized;
    else
      j["profit_normalized"] = nullptr;
    j["expected_profit"] = v_emp;
    j["acceptance"] = ppe.acceptance;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "n: " << s.size() << "\n";
    std::cout << "cutoff: " << fmt6(tau) << "\n";
    std::cout << "ind: " << fmt6(v_ind) << "\n";
    std::cout << "sp: " << fmt6(v_sp) << "\n";
    std::cout << "sf: " << fmt6(v_sf) << "\n";
    std::cout << "auc: " << fmt6(v_auc) << "\n";
    std::cout << "profit_raw: " << fmt6(ppe.raw) << "\n";
    std::cout << "profit_normalized: "
              << (ppe.normalized ? fmt6(*ppe.normalized) : "undefined") << "\n";
    std::cout << "expected_profit: " << fmt6(v_emp) << "\n";
    std::cout << "acceptance: " << fmt6(ppe.acceptance) << "\n";
  }
  return 0;
}

int cmd_frontier(const std::string& records_path, const std::string& out_path) {
  std::vector<ResultRecord> records = read_records_csv(records_path);
  std::vector<std::size_t> frontier = pareto_frontier(records);

  CsvTable t;
  t.header = {"schema", "dataset", "processor", "learner",
              "fold",   "profit_raw", "sp"};
  for (std::size_t idx : frontier) {
    const ResultRecord& r = records[idx];
    char pr[40], sp[40];
    std::snprintf(pr, sizeof(pr), "%.17g", r.profit_raw);
    std::snprintf(sp, sizeof(sp), "%.17g", r.sp);
    t.rows.push_back({"1", r.dataset, r.processor, r.learner,
                      std::to_string(r.fold), pr, sp});
  }
  if (out_path.empty()) {
    std::string line;
    for (std::size_t i = 0; i < t.header.size(); ++i)
      std::cout << (i ? "," : "") << csv_escape(t.header[i]);
    std::cout << "\n";
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i)
        std::cout << (i ? "," : "") << csv_escape(row[i]);
      std::cout << "\n";
    }
  } else {
    csv_write(out_path, t);
  }
  std::size_t ok = 0;
  for (const ResultRecord& r : records)
    if (r.ok) ++ok;
  std::cerr << "frontier: " << frontier.size() << " of " << ok
            << " points non-dominated\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairness-aware credit scoring toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags are accepted after the subcommand too

  CommonOpts opts;
  app.add_option("--config", opts.config_path, "experiment config (TOML)");
  app.add_option("--set", opts.sets, "override, dotted key=value (repeatable)");
  app.add_option("--jobs", opts.jobs, "parallel workers");
  app.add_flag("--json", opts.json, "machine-readable output");
  app.add_option("--seed", opts.seed, "override experiment seed");

  CLI::App* validate = app.add_subcommand("validate", "check a config file");
  CLI::App* run = app.add_subcommand("run", "run the benchmark protocol");
  CLI::App* audit =
      app.add_subcommand("audit", "evaluate an external score file");
  std::string scores_path, cutoff_flag = "auto";
  audit->add_option("scores", scores_path, "CSV with score,label,sensitive")
      ->required();
  audit->add_option("--cutoff", cutoff_flag, "numeric cutoff or 'auto'");
  CLI::App* frontier =
      app.add_subcommand("frontier", "pareto frontier of a records file");
  std::string records_path, out_path;
  frontier->add_option("records", records_path, "records.csv from a run")
      ->required();
  frontier->add_option("--out", out_path, "write frontier CSV here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(opts);
    if (run->parsed()) return cmd_run(opts);
    if (audit->parsed()) return cmd_audit(opts, scores_path, cutoff_flag);
    if (frontier->parsed()) return cmd_frontier(records_path, out_path);
  } catch (const fairscore::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
