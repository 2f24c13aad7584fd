#pragma once

#include <cstdint>
#include <vector>

#include "fairscore/dataset.hpp"
#include "fairscore/learners.hpp"

namespace fairscore {

// Mutual information between the soft prediction and the sensitive attribute,
// reading the model scores as soft counts: P(yhat=1, a) = P(a) * mean score
// within group a. In nats; >= 0, zero iff group mean scores are equal.
double prejudice_index_soft(const std::vector<double>& scores,
                            const std::vector<int>& sensitive);

// Hard-count variant at a cutoff; for reporting only.
double prejudice_index_hard(const std::vector<double>& scores,
                            const std::vector<int>& sensitive, double tau);

struct PrejudiceSpec {
  double eta = 1.0;  // grid {1, 5, 15, 30, 50, 70, 100, 150}
  LearnerSpec base;  // logistic
};

// Penalty eta * PI with analytic dPenalty/dscore_i; shared by the trainer
// and the finite-difference checks. Copies `sensitive`.
ScorePenalty prejudice_penalty(double eta, std::vector<int> sensitive);

// min log-loss + eta * PI, PI differentiated through the soft counts.
// eta = 0 follows exactly the plain logistic trajectory.
TrainedModel train_prejudice_remover(const Dataset& ds,
                                     const PrejudiceSpec& spec);

struct AdversarialSpec {
  double alpha = 0.1;  // grid {0.1, 0.01, 0.001}
  int epochs = 50;
  int batch_size = 128;
  int hidden_size = 16;
  double l2_decay = 0.0;
  double learning_rate = 0.0;            // 0 = network default
  double adversary_learning_rate = 0.1;  // logistic head on (yhat, y)
  std::uint64_t seed = 0;
};

// Alternating updates: the adversary (logistic head predicting x_a from
// (yhat, y)) minimizes its log-loss each mini-batch; the predictor update is
// grad L_P - alpha * grad L_A. Returns the predictor network.
TrainedModel train_adversarial(const Dataset& ds, const AdversarialSpec& spec);

enum class FairnessCriterion { Independence, Separation, Sufficiency };

struct MetaFairSpec {
  FairnessCriterion criterion = FairnessCriterion::Independence;
  double sigma = 0.8;  // desired min/max FM ratio in [0,1]
  double temperature = 0.05;
  double cutoff = 0.0;       // <= 0: derive from the default cost model
  double mu_initial = 1.0;   // penalty weight, doubled each stage
  int stages = 5;
  LearnerSpec base;  // logistic
};

struct MetaFairResult {
  TrainedModel model;
  double hard_ratio = 0.0;
  std::vector<double> stage_hard_ratios;
};

// Smoothed quadratic penalty mu * max(0, sigma - ratio)^2 at cutoff tau with
// analytic dPenalty/dscore_i; shared by the trainer and the
// finite-difference checks. Copies labels/sensitive.
ScorePenalty meta_fair_penalty(std::vector<int> labels,
                               std::vector<int> sensitive,
                               FairnessCriterion criterion, double sigma,
                               double temperature, double mu, double tau);

// Quadratic-penalty trainer for min/max FM ratio >= sigma with
// sigmoid-smoothed group statistics; penalty weight doubles over 5 stages.
MetaFairResult train_meta_fair(const Dataset& ds, const MetaFairSpec& spec);

// Hard group statistic ratio min(FM0,FM1)/max(FM0,FM1) at cutoff tau.
double hard_fm_ratio(const ScoreSet& s, FairnessCriterion criterion,
                     double tau);

}  // namespace fairscore
