#include "hgr/linalg.hpp"

#include <cmath>
#include <iostream>
#include <string_view>

#include "hgr/error.hpp"

namespace hgr {

void warn(std::string_view message) { std::cerr << "warning: " << message << '\n'; }

SymEig sym_eig(const Matrix& a) {
  Matrix s = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  const Eigen::Index n = s.rows();
  SymEig out{Vector(n), Matrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = es.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  return out;
}

double lambda_max(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Matrix s = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(s.rows() - 1);
}

bool inv_sqrt(const Matrix& a, Matrix& out, double rel_floor) {
  SymEig e = sym_eig(a);
  const double top = e.values.size() ? e.values(0) : 0.0;
  if (!(top > 0.0)) return false;
  Vector d(e.values.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (!(e.values(i) > rel_floor * top)) return false;
    d(i) = 1.0 / std::sqrt(e.values(i));
  }
  out = e.vectors * d.asDiagonal() * e.vectors.transpose();
  return true;
}

void canonical_signs(Matrix& cols) {
  for (Eigen::Index j = 0; j < cols.cols(); ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < cols.rows(); ++i) {
      double v = std::abs(cols(i, j));
      // ties resolved to the earliest index; the slack absorbs rounding
      if (v > best * (1.0 + 1e-12) + 1e-15) {
        best = v;
        arg = i;
      }
    }
    if (cols(arg, j) < 0.0) cols.col(j) = -cols.col(j);
  }
}

Matrix canonical_basis(const Matrix& basis) {
  const Eigen::Index n = basis.rows(), k = basis.cols();
  Matrix out(n, k);
  Eigen::Index found = 0;
  for (Eigen::Index e = 0; e < n && found < k; ++e) {
    Vector v = basis * basis.row(e).transpose();
    for (Eigen::Index j = 0; j < found; ++j) v -= out.col(j).dot(v) * out.col(j);
    for (Eigen::Index j = 0; j < found; ++j) v -= out.col(j).dot(v) * out.col(j);
    double nv = v.norm();
    // projections shorter than this are numerically inside the span already built
    if (nv > 1e-6) out.col(found++) = v / nv;
  }
  if (found < k) return basis;
  canonical_signs(out);
  return out;
}

Matrix complement_basis(const Matrix& cols, Eigen::Index n) {
  const Eigen::Index k = cols.cols();
  Matrix out(n, n - k);
  Eigen::Index found = 0;
  for (Eigen::Index e = 0; e < n && found < n - k; ++e) {
    Vector v = Vector::Unit(n, e);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < k; ++j) v -= cols.col(j).dot(v) * cols.col(j);
      for (Eigen::Index j = 0; j < found; ++j) v -= out.col(j).dot(v) * out.col(j);
    }
    double nv = v.norm();
    if (nv > 1e-6) out.col(found++) = v / nv;
  }
  canonical_signs(out);
  return out;
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> equal_blocks(const Vector& v, double tol) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks;
  const Eigen::Index n = v.size();
  Eigen::Index start = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i + 1 == n || v(i) - v(i + 1) > tol) {
      blocks.emplace_back(start, i + 1);
      start = i + 1;
    }
  }
  return blocks;
}

bool orthonormal_columns(const Matrix& a, double tol) {
  Matrix g = a.transpose() * a;
  if (a.cols() == 0) return true;
  return (g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace hgr
