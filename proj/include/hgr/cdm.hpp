#pragma once

#include "hgr/dist_core.hpp"

namespace hgr {

/// A joint measure with its marginals, in the |X| x |Y| layout of
/// JointDistribution. Whichever estimate feeds a CDM (truth, P̂, P̃) is
/// carried as one of these.
struct JointMeasure {
  Matrix pxy;
  Vector px;
  Vector py;
};

JointMeasure true_measure(const JointDistribution& dist);
JointMeasure empirical_measure(const EmpiricalCounts& counts);
/// P̃_X = (P̂_X + r Q_X)/(1+r) restricted to labeled-observed symbols, then
/// P̃_XY = P̂_{Y|X} P̃_X. With m = 0 this is empirical_measure exactly.
JointMeasure semi_measure(const EmpiricalCounts& counts);

/// |Y| x |X| matrix pxy/sqrt(px py) - sqrt(px py); zero where a marginal is 0.
Matrix cdm_matrix(const JointMeasure& mu);
/// Divergence transition matrix pxy/sqrt(px py), |Y| x |X|.
Matrix dtm_matrix(const JointDistribution& dist);

enum class Provenance { True, Supervised, Semi };

struct Cdm {
  Matrix b;      // |Y| x |X|
  Vector sigma;  // length |X|, descending, zero padded
  Matrix phi;    // |X| x |X|
  Matrix psi;    // |Y| x |Y|
  Provenance provenance = Provenance::True;
  double r = 0.0;

  Eigen::Index card_x() const { return b.cols(); }
  Eigen::Index card_y() const { return b.rows(); }
  Matrix phi_k(Eigen::Index k) const { return phi.leftCols(k); }
  Matrix psi_k(Eigen::Index k) const { return psi.leftCols(k); }
  double rho(Eigen::Index k) const { return sigma.head(k).sum(); }
  double top_hscore(Eigen::Index k) const { return sigma.head(k).squaredNorm(); }
  bool is_zero() const { return sigma.size() == 0 || sigma(0) == 0.0; }
};

inline constexpr double kSigmaZero = 1e-12;
inline constexpr double kGapTol = 1e-9;

/// Deterministic SVD of an arbitrary |Y| x |X| matrix.
Cdm make_cdm(const Matrix& b, Provenance provenance = Provenance::True, double r = 0.0);

Cdm true_cdm(const JointDistribution& dist);
Cdm empirical_cdm(const EmpiricalCounts& counts);
Cdm semi_cdm(const EmpiricalCounts& counts);

/// sigma_k == sigma_{k+1} under the gap rule; k is 1-based, sigma_{|X|+1} = 0.
bool degenerate_at(const Cdm& cdm, Eigen::Index k);
double gap_tolerance(const Cdm& cdm);

double hscore(const Cdm& truth, const Matrix& phi);

struct LearningErrorReport {
  double hscore_true = 0.0;
  double hscore_est = 0.0;
  double error = 0.0;
  Eigen::Index k = 0;
};

LearningErrorReport learning_error(const Cdm& truth, const Matrix& phi_hat);

struct MetricBound {
  double lhs = 0.0;
  double rhs = 0.0;
};

MetricBound metric_bound_check(const Cdm& truth, const Vector& phi1_hat);

}  // namespace hgr
