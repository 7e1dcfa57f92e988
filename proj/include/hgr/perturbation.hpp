#pragma once

#include "hgr/dist_core.hpp"

namespace hgr {

/// A(tau) = A + tau A' with the spectrum of A cached (descending).
struct SymmetricPerturbation {
  Matrix a;
  Matrix aprime;
  Vector lambda;
  Matrix v;

  static SymmetricPerturbation make(const Matrix& a, const Matrix& aprime);
};

/// Second-order coefficient: sum_{i<=k} sum_{j>k} (v_i' A' v_j)^2 / (lambda_i - lambda_j).
double trace_expansion_simple(const SymmetricPerturbation& sp, Eigen::Index k);
/// Two-term coefficient for lambda_k = lambda_{k+1}.
double trace_expansion_degenerate(const SymmetricPerturbation& sp, Eigen::Index k);
/// Routes on the gap rule.
double trace_expansion(const SymmetricPerturbation& sp, Eigen::Index k);
bool eigen_degenerate_at(const SymmetricPerturbation& sp, Eigen::Index k);

/// tr{V_k(tau)^T A V_k(tau)}, V_k(tau) the top-k eigenvectors of A + tau A'.
double perturbed_trace(const SymmetricPerturbation& sp, Eigen::Index k, double tau);

enum class PerturbMode { Supervised, Semi };

struct CdmPerturbation {
  Matrix xi;              // |Y| x |X|, Ξ or Ξ̄
  Matrix xi_breve;        // Ξ̆ in semi mode, ξ̃ otherwise
  double bound = 0.0;     // the constant the norm is checked against
  bool bounded_norm_ok = false;
};

/// The linear map applied to a |Y| x |X| direction: vec of the result is L vec(ξ̃).
Matrix apply_xi_map(const JointDistribution& dist, const Matrix& xi_tilde);
/// Ξ̆ = ξ̃ + r/(1+r) sqrt(P_{Y|X}) [ξ - sum_y' sqrt(P_{Y|X}) ξ̃].
Matrix semi_breve(const JointDistribution& dist, const Matrix& xi_tilde, const Vector& xi_m, double r);

CdmPerturbation xi_from_direction(const JointDistribution& dist, const PerturbationDirection& dir,
                                  PerturbMode mode = PerturbMode::Supervised, double r = 0.0);

}  // namespace hgr
