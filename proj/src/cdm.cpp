#include "hgr/cdm.hpp"

#include <algorithm>
#include <cmath>

#include "hgr/error.hpp"

namespace hgr {

JointMeasure true_measure(const JointDistribution& dist) { return {dist.p, dist.px, dist.py}; }

JointMeasure empirical_measure(const EmpiricalCounts& counts) {
  JointMeasure mu;
  mu.pxy = counts.p_hat();
  mu.px = mu.pxy.rowwise().sum();
  mu.py = mu.pxy.colwise().sum().transpose();
  return mu;
}

JointMeasure semi_measure(const EmpiricalCounts& counts) {
  if (counts.m == 0) return empirical_measure(counts);
  const double r = counts.r();
  const Vector px_hat = counts.px_hat();
  const Vector q = counts.q_x();
  Vector pt = (px_hat + r * q) / (1.0 + r);
  for (Eigen::Index x = 0; x < pt.size(); ++x)
    if (px_hat(x) == 0.0) pt(x) = 0.0;
  pt /= pt.sum();
  const Matrix cond = counts.p_y_given_x();
  JointMeasure mu;
  mu.pxy = pt.asDiagonal() * cond;
  mu.px = pt;
  mu.py = mu.pxy.colwise().sum().transpose();
  return mu;
}

Matrix cdm_matrix(const JointMeasure& mu) {
  const Eigen::Index nx = mu.pxy.rows(), ny = mu.pxy.cols();
  Matrix b = Matrix::Zero(ny, nx);
  for (Eigen::Index x = 0; x < nx; ++x) {
    if (!(mu.px(x) > 0.0)) continue;
    for (Eigen::Index y = 0; y < ny; ++y) {
      if (!(mu.py(y) > 0.0)) continue;
      double s = std::sqrt(mu.px(x) * mu.py(y));
      b(y, x) = mu.pxy(x, y) / s - s;
    }
  }
  return b;
}

Matrix dtm_matrix(const JointDistribution& dist) {
  Matrix b = Matrix::Zero(dist.card_y(), dist.card_x());
  for (Eigen::Index x = 0; x < dist.card_x(); ++x)
    for (Eigen::Index y = 0; y < dist.card_y(); ++y)
      if (dist.px(x) > 0.0 && dist.py(y) > 0.0) b(y, x) = dist.p(x, y) / std::sqrt(dist.px(x) * dist.py(y));
  return b;
}

Cdm make_cdm(const Matrix& b, Provenance provenance, double r) {
  const Eigen::Index nx = b.cols(), ny = b.rows();
  Cdm out;
  out.b = b;
  out.provenance = provenance;
  out.r = r;
  Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.sigma = Vector::Zero(nx);
  const Vector& s = svd.singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i) out.sigma(i) = s(i) < kSigmaZero ? 0.0 : s(i);

  Matrix phi = svd.matrixV();
  const double tol = gap_tolerance(out);
  for (auto [begin, end] : equal_blocks(out.sigma, tol)) {
    Matrix block = phi.middleCols(begin, end - begin);
    phi.middleCols(begin, end - begin) = canonical_basis(block);
  }
  out.phi = phi;

  Eigen::Index positive = 0;
  while (positive < nx && out.sigma(positive) > 0.0) ++positive;
  Matrix psi(ny, ny);
  for (Eigen::Index i = 0; i < positive; ++i) psi.col(i) = b * phi.col(i) / out.sigma(i);
  if (positive < ny) {
    // the left null block is fixed the same way, from the complement of the
    // positive-sigma left vectors
    Matrix head = psi.leftCols(positive);
    psi.rightCols(ny - positive) = complement_basis(head, ny);
  }
  out.psi = psi;
  return out;
}

Cdm true_cdm(const JointDistribution& dist) {
  if (!dist.strict) throw Error(ErrorCode::NonStrictDistribution, "true_cdm needs a strict distribution");
  return make_cdm(cdm_matrix(true_measure(dist)), Provenance::True);
}

Cdm empirical_cdm(const EmpiricalCounts& counts) {
  if (counts.n < 1) throw Error(ErrorCode::BadRange, "empirical_cdm needs n >= 1");
  return make_cdm(cdm_matrix(empirical_measure(counts)), Provenance::Supervised);
}

Cdm semi_cdm(const EmpiricalCounts& counts) {
  if (counts.n < 1) throw Error(ErrorCode::BadRange, "semi_cdm needs n >= 1");
  if (counts.m == 0) return make_cdm(cdm_matrix(empirical_measure(counts)), Provenance::Semi, 0.0);
  return make_cdm(cdm_matrix(semi_measure(counts)), Provenance::Semi, counts.r());
}

double gap_tolerance(const Cdm& cdm) {
  double top = cdm.sigma.size() ? cdm.sigma(0) : 0.0;
  return kGapTol * std::max(top, 1e-300);
}

bool degenerate_at(const Cdm& cdm, Eigen::Index k) {
  const Eigen::Index d = cdm.sigma.size();
  if (k < 1 || k > d) throw Error(ErrorCode::IndexOutOfRange, "k out of range");
  double next = k < d ? cdm.sigma(k) : 0.0;
  return cdm.sigma(k - 1) - next <= gap_tolerance(cdm);
}

double hscore(const Cdm& truth, const Matrix& phi) {
  if (phi.rows() != truth.card_x())
    throw Error(ErrorCode::ShapeMismatch, "feature matrix must have |X| rows");
  if (!orthonormal_columns(phi, 1e-8)) throw Error(ErrorCode::NotOrthonormal, "phi columns are not orthonormal");
  return (truth.b * phi).squaredNorm();
}

LearningErrorReport learning_error(const Cdm& truth, const Matrix& phi_hat) {
  LearningErrorReport rep;
  rep.k = phi_hat.cols();
  if (rep.k > truth.card_x()) throw Error(ErrorCode::IndexOutOfRange, "k exceeds |X|");
  rep.hscore_true = truth.top_hscore(rep.k);
  rep.hscore_est = hscore(truth, phi_hat);
  rep.error = rep.hscore_true - rep.hscore_est;
  if (rep.error < 0.0 && rep.error > -1e-10) rep.error = 0.0;
  return rep;
}

MetricBound metric_bound_check(const Cdm& truth, const Vector& phi1_hat) {
  if (truth.sigma.size() < 2) throw Error(ErrorCode::IndexOutOfRange, "need at least two singular values");
  const double s1 = truth.sigma(0), s2 = truth.sigma(1);
  if (!(s1 - s2 >= kGapTol * s1) || s1 == 0.0)
    throw Error(ErrorCode::DegenerateTopGap, "sigma_1 and sigma_2 are not separated");
  if (phi1_hat.size() != truth.card_x() || std::abs(phi1_hat.norm() - 1.0) > 1e-8)
    throw Error(ErrorCode::NotOrthonormal, "phi1_hat must be a unit vector of length |X|");
  const Vector phi1 = truth.phi.col(0);
  Vector est = phi1_hat;
  if (est.dot(phi1) < 0.0) est = -est;
  MetricBound mb;
  mb.lhs = (phi1 - est).squaredNorm();
  double gap = (truth.b * phi1).squaredNorm() - (truth.b * est).squaredNorm();
  mb.rhs = 2.0 / (s1 * s1 - s2 * s2) * std::max(gap, 0.0);
  return mb;
}

}  // namespace hgr
