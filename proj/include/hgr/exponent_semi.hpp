#pragma once

#include "hgr/exponent_sup.hpp"

namespace hgr {

struct SemiContext {
  SupContext sup;
  double r = 0.0;
  Matrix Lbar;  // N x (N + |X|)
  Matrix E;     // L * Lbar
};

SemiContext make_semi_context(const JointDistribution& dist, double r);
SemiContext make_semi_context(const SupContext& sup, double r);

/// N x |X| with M[(x,y), x] = sqrt(P_{Y|X}(y|x)).
Matrix build_M(const JointDistribution& dist);
/// [I - r/(1+r) M M^T | sqrt(r)/(1+r) M].
Matrix build_Lbar(const JointDistribution& dist, double r);

AlphaResult alpha_bar(const JointDistribution& dist, Eigen::Index k, double r);
AlphaResult alpha_bar(const SemiContext& ctx, Eigen::Index k);
double alpha_bar_value(const SemiContext& ctx, Eigen::Index k);

BetaResult beta_bar(const JointDistribution& dist, Eigen::Index k, double r, const BetaConfig& cfg = {});
BetaResult beta_bar(const SemiContext& ctx, Eigen::Index k, const BetaConfig& cfg = {});
/// Objective of the semi problem at u = [vec(ξ̃); sqrt(r) ξ] and the spectral norm of J̄ there.
std::pair<double, double> beta_bar_objective(const SemiContext& ctx, Eigen::Index k, const Matrix& xi_tilde,
                                             const Vector& xi_m);

double sample_bound_semi(double alpha_bar, Eigen::Index card_x, Eigen::Index card_y, double r, double eps,
                         double delta);

ExponentReport exponent_semi(const JointDistribution& dist, Eigen::Index k, double r, const ExponentConfig& cfg = {});

struct BudgetProblem {
  double cost_labeled = 1.0;
  double cost_unlabeled = 1.0;
  double budget = 1.0;
  Eigen::Index k = 1;
  double r_max = 1e3;
  double eta = 0.1;
  int max_iters = 1000;
  unsigned threads = 1;
  BetaConfig beta;
};

struct BudgetPlan {
  double r_star = 0.0;
  double n_labeled = 0.0;  // real-valued allocation
  double n_unlabeled = 0.0;
  long long n_labeled_int = 0;
  long long n_unlabeled_int = 0;
  double leftover = 0.0;
  double objective = 0.0;
  double gradient = 0.0;
  bool boundary = false;
  ExponentPath path = ExponentPath::Spectral;
  int iterations = 0;
};

BudgetPlan optimal_ratio(const BudgetProblem& bp, const JointDistribution& dist);

}  // namespace hgr
