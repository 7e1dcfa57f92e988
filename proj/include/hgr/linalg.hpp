#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hgr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SymEig {
  Vector values;   // descending
  Matrix vectors;  // columns match values
};

/// Symmetric eigendecomposition, eigenvalues sorted descending. The input is
/// symmetrized first so tiny asymmetries from accumulation do not matter.
SymEig sym_eig(const Matrix& a);

double lambda_max(const Matrix& a);

/// Λ^{-1/2} of a symmetric positive definite matrix. Returns false if some
/// eigenvalue is below rel_floor·λmax (or nonpositive).
bool inv_sqrt(const Matrix& a, Matrix& out, double rel_floor = 1e-12);

/// Flip each column so its first entry of largest magnitude is nonnegative.
void canonical_signs(Matrix& cols);

/// Replace the columns of `basis` (orthonormal) with a deterministic basis of
/// the same span: project e_1, e_2, ... in order and keep those that survive
/// Gram-Schmidt. Signs are then canonicalized.
Matrix canonical_basis(const Matrix& basis);

/// Orthonormal basis of the orthogonal complement of span(cols) in R^n.
Matrix complement_basis(const Matrix& cols, Eigen::Index n);

/// Contiguous index blocks [begin, end) over a descending sequence where
/// neighbours are "equal" under the gap rule v[i] − v[i+1] ≤ rel·scale.
std::vector<std::pair<Eigen::Index, Eigen::Index>> equal_blocks(const Vector& v, double tol);

bool orthonormal_columns(const Matrix& a, double tol);

}  // namespace hgr
