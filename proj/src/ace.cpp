#include "hgr/ace.hpp"

#include <cmath>
#include <string>

#include "hgr/error.hpp"
#include "hgr/rng.hpp"

namespace hgr {

namespace {

// Random zero-mean functions in the sqrt-measure coordinates.
Matrix random_centered(const Vector& mu, Eigen::Index k, Rng& rng) {
  const Vector root = mu.cwiseSqrt();
  Matrix f(mu.size(), k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < mu.size(); ++i) f(i, j) = rng.normal();
  for (Eigen::Index j = 0; j < k; ++j) f.col(j).array() -= mu.dot(f.col(j));
  return root.asDiagonal() * f;
}

double surrogate(const Matrix& b, const Matrix& phi, const Matrix& psi) {
  return 2.0 * (psi.transpose() * b * phi).trace() - ((phi.transpose() * phi) * (psi.transpose() * psi)).trace();
}

bool whiten(Matrix& cols) {
  Matrix w;
  if (!inv_sqrt(cols.transpose() * cols, w)) return false;
  cols = cols * w;
  return true;
}

bool solve_gram(const Matrix& cols, Matrix& inv) {
  Matrix gram = cols.transpose() * cols;
  SymEig e = sym_eig(gram);
  if (!(e.values(0) > 0.0) || e.values(e.values.size() - 1) < 1e-12 * e.values(0)) return false;
  inv = e.vectors * e.values.cwiseInverse().asDiagonal() * e.vectors.transpose();
  return true;
}

}  // namespace

Matrix phi_to_feature(const Matrix& phi, const Vector& mu_x) {
  Matrix f = Matrix::Zero(phi.rows(), phi.cols());
  for (Eigen::Index x = 0; x < phi.rows(); ++x)
    if (mu_x(x) > 0.0) f.row(x) = phi.row(x) / std::sqrt(mu_x(x));
  return f;
}

Matrix feature_to_phi(const FeatureMap& fm) { return fm.mu_x.cwiseSqrt().asDiagonal() * fm.f; }

FeatureMap ace_fit(const JointMeasure& mu, const AceConfig& cfg) {
  const Matrix b = cdm_matrix(mu);
  const Eigen::Index nx = b.cols(), ny = b.rows();
  if (cfg.k < 1 || cfg.k > std::min(nx, ny))
    throw Error(ErrorCode::IndexOutOfRange, "k must lie in [1, min(|X|,|Y|)]");
  if (cfg.k > std::min(nx, ny) - 1) warn("ace: k above min(|X|,|Y|)-1");

  FeatureMap fm;
  fm.k = cfg.k;
  fm.mu_x = mu.px;
  fm.mu_y = mu.py;
  Rng root(cfg.seed);

  Matrix phi, psi;
  if (b.norm() < 1e-14) {
    // no dependence at all: any whitened zero-mean pair is optimal
    Rng rng = root.stream(0);
    phi = random_centered(mu.px, cfg.k, rng);
    psi = random_centered(mu.py, cfg.k, rng);
    if (!whiten(phi) || !whiten(psi)) throw Error(ErrorCode::SingularCovariance, "ace: degenerate random start");
    fm.f = phi_to_feature(phi, mu.px);
    fm.g = phi_to_feature(psi, mu.py);
    fm.rho = (psi.transpose() * b * phi).trace();
    fm.objective_trace.push_back(surrogate(b, phi, psi));
    return fm;
  }

  bool converged = false;
  for (int attempt = 0; attempt <= 3 && !converged; ++attempt) {
    Rng rng = root.stream(static_cast<std::uint64_t>(attempt));
    phi = random_centered(mu.px, cfg.k, rng);
    psi = random_centered(mu.py, cfg.k, rng);
    fm.objective_trace.clear();
    bool singular = false;
    double prev = -INFINITY, prev_inc = INFINITY, prev_move = INFINITY;
    Matrix proj_prev;
    int it = 0;
    for (; it < cfg.max_iters; ++it) {
      Matrix inv;
      if (!solve_gram(psi, inv)) { singular = true; break; }
      phi = b.transpose() * psi * inv;
      if (!solve_gram(phi, inv)) { singular = true; break; }
      psi = b * phi * inv;
      double obj = surrogate(b, phi, psi);
      fm.objective_trace.push_back(obj);
      double inc = obj - prev;
      prev = obj;
      // the objective settles quadratically in the subspace error, so the subspace must settle too
      Matrix q = Eigen::HouseholderQR<Matrix>(phi).householderQ() * Matrix::Identity(nx, cfg.k);
      Matrix proj = q * q.transpose();
      double move = it > 0 ? (proj - proj_prev).cwiseAbs().maxCoeff() : INFINITY;
      proj_prev = std::move(proj);
      if (it > 1) {
        double ratio = inc / prev_inc, q_move = move / prev_move;
        bool obj_done = inc <= 0.0 || (inc < cfg.tol && ratio < 1.0 && inc * ratio / (1.0 - ratio) < cfg.tol);
        bool sub_done = move < 1e-15 || (q_move < 1.0 && move / (1.0 - q_move) < cfg.tol);
        if (obj_done && sub_done) { converged = true; break; }
      }
      prev_inc = inc;
      prev_move = move;
    }
    fm.iterations = it + 1;
    if (singular) {
      if (attempt == 3) throw Error(ErrorCode::SingularCovariance, "ace: covariance singular after 3 re-randomizations");
      continue;
    }
    if (!converged) throw Error(ErrorCode::MaxItersExceeded, "ace: no convergence in " + std::to_string(cfg.max_iters) + " iterations");
  }

  if (!whiten(phi)) throw Error(ErrorCode::SingularCovariance, "ace: singular Lambda_f at whitening");
  psi = b * phi;
  if (!whiten(psi)) throw Error(ErrorCode::SingularCovariance, "ace: singular Lambda_g at whitening");
  fm.f = phi_to_feature(phi, mu.px);
  fm.g = phi_to_feature(psi, mu.py);
  fm.rho = (psi.transpose() * b * phi).trace();
  return fm;
}

FeatureMap ace_fit(const EmpiricalCounts& counts, const AceConfig& cfg, AceMode mode) {
  if (counts.n < 1) throw Error(ErrorCode::BadRange, "ace needs labeled samples");
  return ace_fit(mode == AceMode::Semi ? semi_measure(counts) : empirical_measure(counts), cfg);
}

}  // namespace hgr
