#pragma once

// Shared machinery for the spectral-norm and iterative exponent solvers. The
// optimisation variable u is mapped to vec(Ξ) by a fixed matrix E: E = L in the
// supervised problem and E = L L̄(r) in the semi-supervised one.

#include <vector>

#include "hgr/cdm.hpp"
#include "hgr/exponent_sup.hpp"

namespace hgr::detail {

inline Matrix vec_outer_sym(const Matrix& b, const Vector& a, const Vector& c) {
  // vec(B a c^T + B c a^T), column stacking of the |Y| x |X| result
  Matrix m = (b * a) * c.transpose() + (b * c) * a.transpose();
  return Eigen::Map<const Vector>(m.data(), m.size());
}

/// Columns E^T theta_{ij}/sqrt(sigma_i^2 - sigma_j^2) for i < first (0-based i),
/// j >= first. Gram of these is G_{first} in the 1-based sense G_{l-1}.
Matrix g_factor(const Cdm& cdm, const Matrix& e, Eigen::Index first);

double spectral_norm_of_factor(const Matrix& t);

BetaResult solve_beta(const Cdm& cdm, const Matrix& e, Eigen::Index k, const BetaConfig& cfg);

std::pair<double, double> evaluate_beta(const Cdm& cdm, const Matrix& e, Eigen::Index k, const Vector& u);

void check_k(const Cdm& cdm, Eigen::Index k);

}  // namespace hgr::detail
