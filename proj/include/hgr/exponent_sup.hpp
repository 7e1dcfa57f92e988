#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "hgr/cdm.hpp"

namespace hgr {

enum class ExponentPath { Spectral, Iterative };

struct BetaConfig {
  double eta = 0.1;
  double tol = 1e-13;
  int max_iters = 1000;
  int restarts = 5;
  std::uint64_t seed = 0;
};

struct BetaResult {
  double beta = 0.0;
  std::vector<double> trace;  // beta per iteration, best restart
  Matrix xi_tilde;            // |Y| x |X| direction at which beta was last evaluated
  Vector xi_m;                // unlabeled part, semi-supervised solver only
  double lambda_max_j = 0.0;  // spectral norm of J at xi_tilde
  int iterations = 0;
  int best_restart = 0;
  bool converged = false;
};

struct ExponentReport {
  Eigen::Index k = 0;
  ExponentPath path = ExponentPath::Spectral;
  double alpha_or_beta = 0.0;
  double exponent = 0.0;
  double normalized = 0.0;
  double gap = 0.0;
  bool infinite = false;
  // iterative path only
  std::optional<BetaConfig> beta_config;
  int iterations = 0;
  bool converged = true;
  // semi-supervised reports only
  double r = 0.0;
  std::optional<double> supervised_exponent;
  std::optional<bool> upper_bound_ok;
};

struct ExponentConfig {
  std::optional<ExponentPath> force_path;
  BetaConfig beta;
};

struct SampleBound {
  double eps = 0.0;
  double delta = 0.0;
  double t = 0.0;
  double n_bound = 0.0;
};

inline constexpr Eigen::Index kMaxCells = 4096;

/// Everything the exponent formulas need about one distribution.
struct SupContext {
  JointDistribution dist;
  Cdm cdm;
  Matrix L;
  Eigen::Index d() const { return cdm.card_x(); }
};

SupContext make_sup_context(const JointDistribution& dist);

Matrix build_L(const JointDistribution& dist);
/// theta_ij with 1-based 1 <= i <= j <= |X|.
Vector build_theta(const Cdm& cdm, Eigen::Index i, Eigen::Index j);

struct AlphaResult {
  Matrix G;
  double alpha = 0.0;
};

AlphaResult alpha_k(const JointDistribution& dist, Eigen::Index k);
AlphaResult alpha_k(const SupContext& ctx, Eigen::Index k);
/// alpha_k without materializing G (spectral norm through the small Gram).
double alpha_value(const SupContext& ctx, Eigen::Index k);

BetaResult beta_k(const JointDistribution& dist, Eigen::Index k, const BetaConfig& cfg = {});
BetaResult beta_k(const SupContext& ctx, Eigen::Index k, const BetaConfig& cfg = {});
/// vec(ξ̃)^T J_k(ξ̃) vec(ξ̃) and the spectral norm of J_k(ξ̃).
std::pair<double, double> beta_objective(const SupContext& ctx, Eigen::Index k, const Matrix& xi_tilde);

ExponentReport exponent(const JointDistribution& dist, Eigen::Index k, const ExponentConfig& cfg = {});
ExponentReport exponent(const SupContext& ctx, Eigen::Index k, const ExponentConfig& cfg = {});

SampleBound sample_bound(double alpha_or_beta, Eigen::Index card_x, Eigen::Index card_y, double eps, double delta);

enum class DegeneratePolicy { Skip, Iterative };

struct TrendConfig {
  Eigen::Index card_x = 12;
  Eigen::Index card_y = 10;
  Eigen::Index k_max = 9;
  std::size_t num_dists = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  DegeneratePolicy policy = DegeneratePolicy::Skip;
  BetaConfig beta;
  /// Replaces random_distribution when set; called with the distribution index.
  std::function<JointDistribution(std::size_t, Rng&)> generator;
};

struct TrendRow {
  Eigen::Index k = 0;
  double mean_normalized = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
};

std::vector<TrendRow> trend_experiment(const TrendConfig& cfg);

}  // namespace hgr
