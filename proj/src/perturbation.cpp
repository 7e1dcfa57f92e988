#include "hgr/perturbation.hpp"

#include <cmath>

#include "hgr/error.hpp"

namespace hgr {

SymmetricPerturbation SymmetricPerturbation::make(const Matrix& a, const Matrix& aprime) {
  if (a.rows() != a.cols() || aprime.rows() != a.rows() || aprime.cols() != a.cols())
    throw Error(ErrorCode::ShapeMismatch, "A and A' must be square of equal size");
  if ((a - a.transpose()).norm() >= 1e-12) throw Error(ErrorCode::NotSymmetric, "A is not symmetric");
  if ((aprime - aprime.transpose()).norm() >= 1e-12) throw Error(ErrorCode::NotSymmetric, "A' is not symmetric");
  SymmetricPerturbation sp{a, aprime, {}, {}};
  SymEig e = sym_eig(a);
  sp.lambda = e.values;
  sp.v = e.vectors;
  return sp;
}

namespace {

double eig_tol(const SymmetricPerturbation& sp) {
  return 1e-9 * (sp.lambda.size() ? std::abs(sp.lambda(0)) : 0.0);
}

void check_k(const SymmetricPerturbation& sp, Eigen::Index k) {
  if (k < 1 || k > sp.lambda.size()) throw Error(ErrorCode::IndexOutOfRange, "k out of range");
}

}  // namespace

bool eigen_degenerate_at(const SymmetricPerturbation& sp, Eigen::Index k) {
  check_k(sp, k);
  if (k == sp.lambda.size()) return false;
  return sp.lambda(k - 1) - sp.lambda(k) <= eig_tol(sp);
}

double trace_expansion_simple(const SymmetricPerturbation& sp, Eigen::Index k) {
  if (eigen_degenerate_at(sp, k)) throw Error(ErrorCode::DegenerateGap, "lambda_k and lambda_{k+1} coincide");
  const Matrix c = sp.v.transpose() * sp.aprime * sp.v;
  const Eigen::Index d = sp.lambda.size();
  double coef = 0.0;
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = k; j < d; ++j) coef += c(i, j) * c(i, j) / (sp.lambda(i) - sp.lambda(j));
  return coef;
}

double trace_expansion_degenerate(const SymmetricPerturbation& sp, Eigen::Index k) {
  check_k(sp, k);
  const Eigen::Index d = sp.lambda.size();
  const double tol = eig_tol(sp);
  const double lk = sp.lambda(k - 1);
  Eigen::Index first = k - 1, last = k - 1;
  while (first > 0 && sp.lambda(first - 1) - lk <= tol) --first;
  while (last + 1 < d && lk - sp.lambda(last + 1) <= tol) ++last;
  const Eigen::Index block = last - first + 1;

  const Matrix c = sp.v.transpose() * sp.aprime * sp.v;
  double coef = 0.0;
  for (Eigen::Index i = 0; i < first; ++i)
    for (Eigen::Index j = first; j < d; ++j) coef += c(i, j) * c(i, j) / (sp.lambda(i) - sp.lambda(j));

  const Matrix vi = sp.v.middleCols(first, block);
  SymEig inner = sym_eig(vi.transpose() * sp.aprime * vi);
  Matrix beta = inner.vectors.leftCols(k - first);
  canonical_signs(beta);
  const Matrix vhat = vi * beta;
  const Matrix cross = vhat.transpose() * sp.aprime * sp.v;
  for (Eigen::Index i = 0; i < vhat.cols(); ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      if (j >= first && j <= last) continue;
      coef += cross(i, j) * cross(i, j) / (lk - sp.lambda(j));
    }
  return coef;
}

double trace_expansion(const SymmetricPerturbation& sp, Eigen::Index k) {
  return eigen_degenerate_at(sp, k) ? trace_expansion_degenerate(sp, k) : trace_expansion_simple(sp, k);
}

double perturbed_trace(const SymmetricPerturbation& sp, Eigen::Index k, double tau) {
  check_k(sp, k);
  SymEig e = sym_eig(sp.a + tau * sp.aprime);
  const Matrix vk = e.vectors.leftCols(k);
  return (vk.transpose() * sp.a * vk).trace();
}

Matrix apply_xi_map(const JointDistribution& dist, const Matrix& xt) {
  const Eigen::Index nx = dist.card_x(), ny = dist.card_y();
  if (xt.rows() != ny || xt.cols() != nx) throw Error(ErrorCode::ShapeMismatch, "direction must be |Y| x |X|");
  Matrix sq = dist.p.cwiseSqrt().transpose();  // |Y| x |X|, sqrt P(x,y) at (y,x)
  Vector col = (sq.cwiseProduct(xt)).colwise().sum().transpose();  // over y', per x
  Vector row = (sq.cwiseProduct(xt)).rowwise().sum();              // over x', per y
  Matrix xi(ny, nx);
  for (Eigen::Index x = 0; x < nx; ++x)
    for (Eigen::Index y = 0; y < ny; ++y) {
      const double pxy = dist.p(x, y), prod = dist.px(x) * dist.py(y), s = std::sqrt(prod);
      xi(y, x) = sq(y, x) / s * xt(y, x) - (pxy + prod) / (2.0 * s) * (col(x) / dist.px(x) + row(y) / dist.py(y));
    }
  return xi;
}

Matrix semi_breve(const JointDistribution& dist, const Matrix& xt, const Vector& xi_m, double r) {
  const Eigen::Index nx = dist.card_x(), ny = dist.card_y();
  if (xi_m.size() != nx) throw Error(ErrorCode::ShapeMismatch, "xi_m must have length |X|");
  Matrix out = xt;
  const double w = r / (1.0 + r);
  for (Eigen::Index x = 0; x < nx; ++x) {
    Vector cond(ny);
    for (Eigen::Index y = 0; y < ny; ++y) cond(y) = std::sqrt(dist.p(x, y) / dist.px(x));
    const double s = xi_m(x) - cond.dot(xt.col(x));
    out.col(x) += w * s * cond;
  }
  return out;
}

CdmPerturbation xi_from_direction(const JointDistribution& dist, const PerturbationDirection& dir,
                                  PerturbMode mode, double r) {
  if (!dist.strict) throw Error(ErrorCode::NonStrictDistribution, "xi_from_direction needs a strict distribution");
  if (mode == PerturbMode::Semi && !(r >= 0.0)) throw Error(ErrorCode::BadRange, "r must be nonnegative");
  CdmPerturbation out;
  if (mode == PerturbMode::Semi) {
    Vector xm = dir.xi_m.size() ? dir.xi_m : Vector::Zero(dist.card_x());
    out.xi_breve = semi_breve(dist, dir.xi_tilde, xm, r);
  } else {
    out.xi_breve = dir.xi_tilde;
  }
  out.xi = apply_xi_map(dist, out.xi_breve);
  double pmin = INFINITY;
  for (Eigen::Index i = 0; i < dist.p.size(); ++i)
    if (dist.p.data()[i] > 0.0) pmin = std::min(pmin, dist.p.data()[i]);
  const double nx = static_cast<double>(dist.card_x()), ny = static_cast<double>(dist.card_y());
  const double mx = out.xi_breve.size() ? out.xi_breve.cwiseAbs().maxCoeff() : 0.0;
  out.bound = std::sqrt(nx * ny) * (1.0 + nx + ny) / (pmin * pmin) * mx;
  out.bounded_norm_ok = out.xi.norm() <= out.bound * (1.0 + 1e-12) + 1e-300;
  return out;
}

}  // namespace hgr
