#pragma once

#include <cstdint>
#include <span>

#include "hgr/linalg.hpp"
#include "hgr/rng.hpp"

namespace hgr {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using CountVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// Finite joint distribution p(x, y), stored |X| x |Y| with 0-based symbols.
struct JointDistribution {
  Matrix p;
  Vector px;
  Vector py;
  bool strict = false;

  Eigen::Index card_x() const { return p.rows(); }
  Eigen::Index card_y() const { return p.cols(); }

  static JointDistribution from_matrix(const Matrix& raw);
};

/// Labeled counts c(x, y) and unlabeled counts u(x).
struct EmpiricalCounts {
  CountMatrix c;
  CountVector u;
  std::int64_t n = 0;
  std::int64_t m = 0;

  EmpiricalCounts() = default;
  EmpiricalCounts(CountMatrix labeled, CountVector unlabeled);

  Eigen::Index card_x() const { return c.rows(); }
  Eigen::Index card_y() const { return c.cols(); }
  double r() const { return n > 0 ? static_cast<double>(m) / static_cast<double>(n) : 0.0; }

  Matrix p_hat() const;
  Vector px_hat() const;
  Vector py_hat() const;
  Vector q_x() const;
  /// Row x holds P̂_{Y|X}(.|x); rows of unobserved x are zero.
  Matrix p_y_given_x() const;
};

/// Perturbation direction. xi_tilde is |Y| x |X| (entry (y, x)); xi_m has
/// length |X| in semi mode and is empty otherwise.
struct PerturbationDirection {
  Matrix xi_tilde;
  Vector xi_m;
};

JointDistribution random_distribution(Eigen::Index card_x, Eigen::Index card_y, Rng& rng);

EmpiricalCounts sample_labeled(const JointDistribution& dist, std::int64_t n, Rng& rng);
EmpiricalCounts sample_unlabeled(const JointDistribution& dist, std::int64_t m, Rng& rng);
/// Labeled and unlabeled draws from independent substreams of `rng`.
EmpiricalCounts sample_both(const JointDistribution& dist, std::int64_t n, std::int64_t m, const Rng& rng);

/// Multinomial(n, probs) by sequential conditional binomials.
CountVector multinomial(std::int64_t n, std::span<const double> probs, Rng& rng);

double kl_divergence(std::span<const double> q, std::span<const double> p);
double kl_divergence(const JointDistribution& q, const JointDistribution& p);
double kl_divergence(const Vector& q, const Vector& p);

PerturbationDirection perturbation_from_empirical(const JointDistribution& dist,
                                                  const EmpiricalCounts& counts, double eps);
/// P̂ = P + sqrt(eps P) ⊙ ξ̃ (and Q_X likewise when xi_m is present).
void empirical_from_perturbation(const JointDistribution& dist, const PerturbationDirection& dir,
                                 double eps, Matrix& p_hat, Vector& q_x);

}  // namespace hgr
