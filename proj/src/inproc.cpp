#include "fairscore/inproc.hpp"

#include <algorithm>
#include <cmath>

#include "fairscore/profit.hpp"
#include "fairscore/rng.hpp"

namespace fairscore {

namespace {

double clamp01(double v) {
  return std::min(1.0 - 1e-12, std::max(1e-12, v));
}

double mi_2x2(double q0, double q1, double m0, double m1) {
  // Joint P(yhat=1, a) = q_a * m_a; mutual information in nats.
  const double p1 = q0 * m0 + q1 * m1;
  const double p0 = 1.0 - p1;
  const double joint[2][2] = {{q0 * (1.0 - m0), q0 * m0},
                              {q1 * (1.0 - m1), q1 * m1}};
  const double marg_yhat[2] = {p0, p1};
  const double marg_a[2] = {q0, q1};
  double pi = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int yh = 0; yh < 2; ++yh) {
      double p = joint[a][yh];
      if (p > 0.0) pi += p * std::log(p / (marg_yhat[yh] * marg_a[a]));
    }
  return std::max(0.0, pi);
}

struct GroupMeans {
  double q[2];  // group fractions
  double m[2];  // mean (soft) score per group
  std::size_t n[2];
};

GroupMeans group_means(const std::vector<double>& scores,
                       const std::vector<int>& sensitive) {
  GroupMeans g{{0, 0}, {0, 0}, {0, 0}};
  for (std::size_t i = 0; i < scores.size(); ++i) {
    g.n[sensitive[i]] += 1;
    g.m[sensitive[i]] += scores[i];
  }
  if (g.n[0] == 0 || g.n[1] == 0) throw EmptyGroup("prejudice index needs both groups");
  for (int a = 0; a < 2; ++a) {
    g.q[a] = static_cast<double>(g.n[a]) / static_cast<double>(scores.size());
    g.m[a] = clamp01(g.m[a] / static_cast<double>(g.n[a]));
  }
  return g;
}

}  // namespace

double prejudice_index_soft(const std::vector<double>& scores,
                            const std::vector<int>& sensitive) {
  GroupMeans g = group_means(scores, sensitive);
  return mi_2x2(g.q[0], g.q[1], g.m[0], g.m[1]);
}

double prejudice_index_hard(const std::vector<double>& scores,
                            const std::vector<int>& sensitive, double tau) {
  std::vector<double> hard(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    hard[i] = scores[i] > tau ? 1.0 : 0.0;
  GroupMeans g = group_means(hard, sensitive);
  return mi_2x2(g.q[0], g.q[1], g.m[0], g.m[1]);
}

ScorePenalty prejudice_penalty(double eta, std::vector<int> sensitive) {
  return [eta, sens = std::move(sensitive)](const std::vector<double>& scores,
                                            Vector& grad) {
    GroupMeans g = group_means(scores, sens);
    const double p1 = g.q[0] * g.m[0] + g.q[1] * g.m[1];
    const double p0 = 1.0 - p1;
    const double n = static_cast<double>(scores.size());
    // dPI/ds_i = (1/n) * ln( (m_a / (1-m_a)) * (P0 / P1) ) for i in group a.
    double dlog[2];
    for (int a = 0; a < 2; ++a)
      dlog[a] = std::log((g.m[a] / (1.0 - g.m[a])) * (p0 / p1));
    for (std::size_t i = 0; i < scores.size(); ++i)
      grad[static_cast<Eigen::Index>(i)] = eta * dlog[sens[i]] / n;
    return eta * mi_2x2(g.q[0], g.q[1], g.m[0], g.m[1]);
  };
}

TrainedModel train_prejudice_remover(const Dataset& ds,
                                     const PrejudiceSpec& spec) {
  LearnerSpec base = spec.base;
  base.kind = LearnerKind::Logistic;
  return train_logistic(ds, base, prejudice_penalty(spec.eta, ds.sensitive));
}

TrainedModel train_adversarial(const Dataset& ds, const AdversarialSpec& spec) {
  LearnerSpec net;
  net.kind = LearnerKind::Network;
  net.hidden_size = spec.hidden_size;
  net.max_iterations = spec.epochs;
  net.batch_size = spec.batch_size;
  net.l2_decay = spec.l2_decay;
  net.learning_rate = spec.learning_rate;
  net.seed = spec.seed;

  // Adversary: logistic head sigma(v0*yhat + v1*y + v2) predicting x_a.
  Vector v = Vector::Zero(3);
  const double lr_adv = spec.adversary_learning_rate;

  AdversaryHook hook;
  hook.alpha = spec.alpha;
  hook.step = [&v, lr_adv](const std::vector<double>& batch_scores,
                           const std::vector<int>& batch_labels,
                           const std::vector<int>& batch_sens) {
    const auto m = static_cast<Eigen::Index>(batch_scores.size());
    const double inv_m = 1.0 / static_cast<double>(m);

    Vector grad_v = Vector::Zero(3);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      double z = v[0] * batch_scores[idx] +
                 v[1] * static_cast<double>(batch_labels[idx]) + v[2];
      double q = sigmoid(z);
      double r = (q - static_cast<double>(batch_sens[idx])) * inv_m;
      grad_v[0] += r * batch_scores[idx];
      grad_v[1] += r * static_cast<double>(batch_labels[idx]);
      grad_v[2] += r;
    }
    v -= lr_adv * grad_v;

    // dL_A/dscore with the freshly updated adversary.
    Vector dscore(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      double z = v[0] * batch_scores[idx] +
                 v[1] * static_cast<double>(batch_labels[idx]) + v[2];
      double q = sigmoid(z);
      dscore[i] = (q - static_cast<double>(batch_sens[idx])) * inv_m * v[0];
    }
    return dscore;
  };
  return train_network(ds, net, &hook);
}

namespace {

struct SmoothedFm {
  double fm[2];
  // dFM_a / d(soft acceptance of instance i); only instances of group a
  // contribute.
  std::vector<double> dfm;
};

SmoothedFm smoothed_fm(const std::vector<double>& soft,
                       const std::vector<int>& labels,
                       const std::vector<int>& sensitive,
                       FairnessCriterion crit) {
  const std::size_t n = soft.size();
  SmoothedFm out;
  out.dfm.assign(n, 0.0);
  std::size_t n_a[2] = {0, 0}, n_a0[2] = {0, 0}, n_a1[2] = {0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    ++n_a[sensitive[i]];
    (labels[i] == 1 ? n_a1 : n_a0)[sensitive[i]] += 1;
  }
  if (n_a[0] == 0 || n_a[1] == 0) throw EmptyGroup("meta-fair needs both groups");

  switch (crit) {
    case FairnessCriterion::Independence: {
      double sum[2] = {0, 0};
      for (std::size_t i = 0; i < n; ++i) sum[sensitive[i]] += soft[i];
      for (int a = 0; a < 2; ++a)
        out.fm[a] = sum[a] / static_cast<double>(n_a[a]);
      for (std::size_t i = 0; i < n; ++i)
        out.dfm[i] = 1.0 / static_cast<double>(n_a[sensitive[i]]);
      break;
    }
    case FairnessCriterion::Separation: {
      for (int a = 0; a < 2; ++a)
        if (n_a0[a] == 0 || n_a1[a] == 0)
          throw DegenerateFM("group " + std::to_string(a) + " lacks a class");
      double fpr[2] = {0, 0}, fnr[2] = {0, 0};
      for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] == 1)
          fnr[sensitive[i]] += 1.0 - soft[i];
        else
          fpr[sensitive[i]] += soft[i];
      }
      for (int a = 0; a < 2; ++a) {
        fpr[a] /= static_cast<double>(n_a0[a]);
        fnr[a] /= static_cast<double>(n_a1[a]);
        out.fm[a] = 1.0 - 0.5 * (fpr[a] + fnr[a]);
      }
      for (std::size_t i = 0; i < n; ++i) {
        int a = sensitive[i];
        out.dfm[i] = labels[i] == 1 ? 0.5 / static_cast<double>(n_a1[a])
                                    : -0.5 / static_cast<double>(n_a0[a]);
      }
      break;
    }
    case FairnessCriterion::Sufficiency: {
      double num[2] = {0, 0}, den[2] = {0, 0};
      for (std::size_t i = 0; i < n; ++i) {
        den[sensitive[i]] += soft[i];
        if (labels[i] == 1) num[sensitive[i]] += soft[i];
      }
      for (int a = 0; a < 2; ++a) {
        if (den[a] < 1e-12)
          throw DegenerateFM("group " + std::to_string(a) +
                             " soft acceptance mass vanished");
        out.fm[a] = num[a] / den[a];
      }
      for (std::size_t i = 0; i < n; ++i) {
        int a = sensitive[i];
        out.dfm[i] =
            (static_cast<double>(labels[i]) * den[a] - num[a]) / (den[a] * den[a]);
      }
      break;
    }
  }
  return out;
}

}  // namespace

ScorePenalty meta_fair_penalty(std::vector<int> labels,
                               std::vector<int> sensitive,
                               FairnessCriterion criterion, double sigma,
                               double temperature, double mu, double tau) {
  return [labels = std::move(labels), sensitive = std::move(sensitive),
          criterion, sigma, temperature, mu,
          tau](const std::vector<double>& scores, Vector& grad) -> double {
    const std::size_t n = scores.size();
    std::vector<double> soft(n);
    std::vector<double> dsoft(n);  // d(soft)/d(score)
    for (std::size_t i = 0; i < n; ++i) {
      soft[i] = sigmoid((scores[i] - tau) / temperature);
      dsoft[i] = soft[i] * (1.0 - soft[i]) / temperature;
    }
    SmoothedFm fm = smoothed_fm(soft, labels, sensitive, criterion);
    double lo = std::min(fm.fm[0], fm.fm[1]);
    double hi = std::max(fm.fm[0], fm.fm[1]);
    if (hi <= 1e-12) throw DegenerateFM("smoothed FM vanished in both groups");
    double ratio = lo / hi;
    double slack = sigma - ratio;
    if (slack <= 0.0) return 0.0;  // grad stays zero

    int lo_group = fm.fm[0] <= fm.fm[1] ? 0 : 1;
    double dr_dfm[2];
    dr_dfm[lo_group] = 1.0 / hi;
    dr_dfm[1 - lo_group] = -lo / (hi * hi);
    const double dpen_dr = -2.0 * mu * slack;
    for (std::size_t i = 0; i < n; ++i) {
      int a = sensitive[i];
      grad[static_cast<Eigen::Index>(i)] =
          dpen_dr * dr_dfm[a] * fm.dfm[i] * dsoft[i];
    }
    return mu * slack * slack;
  };
}

double hard_fm_ratio(const ScoreSet& s, FairnessCriterion criterion,
                     double tau) {
  std::vector<double> hard(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    hard[i] = s.scores[i] > tau ? 1.0 : 0.0;
  SmoothedFm fm = smoothed_fm(hard, s.labels, s.sensitive, criterion);
  double lo = std::min(fm.fm[0], fm.fm[1]);
  double hi = std::max(fm.fm[0], fm.fm[1]);
  if (hi <= 0.0) throw DegenerateFM("both group statistics are zero");
  return lo / hi;
}

MetaFairResult train_meta_fair(const Dataset& ds, const MetaFairSpec& spec) {
  if (spec.sigma < 0.0 || spec.sigma > 1.0)
    throw ConfigError("meta-fair sigma must lie in [0,1]");
  const double tau = spec.cutoff > 0.0 ? spec.cutoff
                                       : operating_cutoff(CostModel{});
  const double temp = spec.temperature;

  LearnerSpec base = spec.base;
  base.kind = LearnerKind::Logistic;

  TrainedModel m;
  m.kind = LearnerKind::Logistic;
  m.seed = base.seed;
  Matrix x = standardize_features(ds.features, &m.feature_mean,
                                  &m.feature_scale, base.standardize);
  m.coef = Vector::Zero(x.cols());
  m.intercept = 0.0;

  MetaFairResult result;
  int total_iters = 0;
  for (int stage = 0; stage < spec.stages; ++stage) {
    const double mu = spec.mu_initial * std::pow(2.0, stage);
    ScorePenalty penalty = meta_fair_penalty(
        ds.labels, ds.sensitive, spec.criterion, spec.sigma, temp, mu, tau);

    total_iters +=
        logistic_descend(ds, base, x, m.coef, m.intercept, m.final_loss, penalty);

    Vector z = x * m.coef;
    z.array() += m.intercept;
    ScoreSet stage_scores;
    stage_scores.labels = ds.labels;
    stage_scores.sensitive = ds.sensitive;
    stage_scores.scores.resize(static_cast<std::size_t>(z.size()));
    for (Eigen::Index i = 0; i < z.size(); ++i)
      stage_scores.scores[static_cast<std::size_t>(i)] = sigmoid(z[i]);
    result.stage_hard_ratios.push_back(
        hard_fm_ratio(stage_scores, spec.criterion, tau));
  }
  m.iterations_used = total_iters;
  result.model = std::move(m);
  result.hard_ratio = result.stage_hard_ratios.back();
  return result;
}

}  // namespace fairscore
