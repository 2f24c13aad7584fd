#pragma once

#include <optional>
#include <vector>

#include "fairscore/dataset.hpp"

namespace fairscore {

// Profit parameters. B (fractional loss given default) has point masses at
// 0 and 1 plus a uniform remainder; C is the per-EUR return on a repaid loan.
struct CostModel {
  double roi = 0.2664;          // C
  double p0 = 0.55;             // P(B = 0)
  double p1 = 0.10;             // P(B = 1)
  int quadrature_points = 1001; // nodes for the uniform part

  double expected_b() const { return p1 + (1.0 - p0 - p1) * 0.5; }
  void validate() const;
};

// Profit per EUR at a fixed cutoff and loss severity b:
//   C * (pi1*(1-F1(tau)) - pi1*F1(tau)) - b * pi0*(1-F0(tau))
// with F_i the empirical score CDF of class i (acceptance is score > tau).
double profit_at(const ScoreSet& s, double tau, double b, const CostModel& cm);

struct ExpectedProfit {
  double value = 0.0;
  // Optimal cutoff at B=0, B=1 and each uniform-part quadrature node.
  double cutoff_at_b0 = 0.0;
  double cutoff_at_b1 = 0.0;
  std::vector<double> node_cutoffs;
};

// EMP-style profit: inner maximization over cutoffs per realization of B;
// point masses handled analytically, uniform part by composite trapezoid.
ExpectedProfit expected_profit(const ScoreSet& s, const CostModel& cm);

// Deterministic operating cutoff tau* = E[B] / (2C + E[B]): the score above
// which accepting beats rejecting in expected integrand contribution.
double operating_cutoff(const CostModel& cm);

struct ProfitPerEur {
  double raw = 0.0;                  // fixed-tau profit at the operating cutoff
  std::optional<double> normalized;  // raw / acceptance rate; empty if nothing accepted
  double cutoff = 0.0;
  double acceptance = 0.0;
};

ProfitPerEur profit_per_eur(const ScoreSet& s, const CostModel& cm);

// Candidate cutoffs for the inner maximization: midpoints between adjacent
// distinct scores plus 0 and 1. Exposed for tests.
std::vector<double> candidate_cutoffs(const std::vector<double>& scores);

}  // namespace fairscore
