#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fairscore/dataset.hpp"

namespace fairscore {

enum class LearnerKind { Logistic, Network };

std::string learner_kind_name(LearnerKind k);

struct LearnerSpec {
  LearnerKind kind = LearnerKind::Logistic;
  double l2_decay = 0.0;
  int hidden_size = 5;       // network only
  int max_iterations = 1000; // logistic: GD steps; network: epochs
  double learning_rate = 0.0; // 0 = kind-specific default
  int batch_size = 128;      // network only
  std::uint64_t seed = 0;
  bool standardize = true;
};

struct TrainedModel {
  LearnerKind kind = LearnerKind::Logistic;

  // Logistic parameters.
  Vector coef;
  double intercept = 0.0;

  // Network parameters: one hidden sigmoid layer, sigmoid output.
  Matrix w1;  // k x h
  Vector b1;  // h
  Vector w2;  // h
  double b2 = 0.0;

  // Standardization statistics from training rows only.
  Vector feature_mean;
  Vector feature_scale;

  double final_loss = 0.0;
  int iterations_used = 0;
  std::uint64_t seed = 0;

  std::vector<double> predict(const Matrix& features) const;
  ScoreSet score(const Dataset& ds) const;

  void save(const std::string& path) const;  // bit-exact round trip
  static TrainedModel load(const std::string& path);
};

// Extra differentiable penalty on the score vector; used by the prejudice
// remover. Returns the penalty value and fills grad (dPenalty/dscore_i).
using ScorePenalty =
    std::function<double(const std::vector<double>& scores, Vector& grad)>;

// Full-batch gradient descent on instance-weighted log-loss
// + (l2_decay/2)*||coef||^2 (intercept unpenalized). Zero-initialized, fixed
// step with halving whenever a step would increase the loss.
TrainedModel train_logistic(const Dataset& ds, const LearnerSpec& spec,
                            const ScorePenalty& penalty = nullptr);

// Adversary side-channel for adversarial debiasing: called once per
// mini-batch after the forward pass. Must update the adversary's own
// parameters and return dL_A/dscore for each batch instance.
struct AdversaryHook {
  double alpha = 0.0;
  std::function<Vector(const std::vector<double>& batch_scores,
                       const std::vector<int>& batch_labels,
                       const std::vector<int>& batch_sensitive)>
      step;
};

// Mini-batch gradient descent on instance-weighted log-loss
// + l2_decay*||weights||^2 (biases unpenalized). Seeded shuffle and
// uniform(+-1/sqrt(fan_in)) initialization.
TrainedModel train_network(const Dataset& ds, const LearnerSpec& spec,
                           AdversaryHook* hook = nullptr);

// Fixed-step gradient descent with halving on loss increase, starting from
// the given parameters. Returns accepted iteration count. Shared by
// train_logistic and the staged meta-fair trainer so warm starts follow the
// exact same trajectory.
int logistic_descend(const Dataset& ds, const LearnerSpec& spec,
                     const Matrix& standardized, Vector& coef,
                     double& intercept, double& loss,
                     const ScorePenalty& penalty = nullptr);

// Analytic gradient of the logistic objective at given parameters; used by
// finite-difference checks.
double logistic_objective(const Dataset& ds, const LearnerSpec& spec,
                          const Vector& coef, double intercept,
                          const Matrix& standardized, Vector* grad_coef,
                          double* grad_intercept,
                          const ScorePenalty& penalty = nullptr);

// Network parameters as one bundle; used by the objective below.
struct NetworkParams {
  Matrix w1;
  Vector b1;
  Vector w2;
  double b2 = 0.0;
};

// Full-batch network objective (weighted log-loss + l2_decay*||weights||^2,
// biases unpenalized) with analytic gradients via the same backpropagation
// math as the mini-batch trainer; used by finite-difference checks.
double network_objective(const Dataset& ds, const LearnerSpec& spec,
                         const Matrix& standardized, const NetworkParams& p,
                         NetworkParams* grad);

// Standardize with training statistics (mean/scale); scale 1 where the
// feature is constant.
Matrix standardize_features(const Matrix& x, Vector* mean, Vector* scale,
                            bool enabled);

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace fairscore
