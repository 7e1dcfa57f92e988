#include "hgr/exponent_sup.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "hgr/error.hpp"
#include "hgr/parallel.hpp"
#include "spectral_detail.hpp"

namespace hgr {

namespace detail {

void check_k(const Cdm& cdm, Eigen::Index k) {
  if (k < 1 || k > cdm.card_x() - 1)
    throw Error(ErrorCode::IndexOutOfRange, "k must lie in [1, |X|-1], got " + std::to_string(k));
}

Matrix g_factor(const Cdm& cdm, const Matrix& e, Eigen::Index first) {
  const Eigen::Index d = cdm.card_x();
  Matrix t(e.cols(), first * (d - first));
  Eigen::Index c = 0;
  for (Eigen::Index i = 0; i < first; ++i)
    for (Eigen::Index j = first; j < d; ++j) {
      const double den = cdm.sigma(i) * cdm.sigma(i) - cdm.sigma(j) * cdm.sigma(j);
      Vector theta = vec_outer_sym(cdm.b, cdm.phi.col(i), cdm.phi.col(j));
      t.col(c++) = e.transpose() * theta / std::sqrt(den);
    }
  return t;
}

double spectral_norm_of_factor(const Matrix& t) {
  if (t.cols() == 0) return 0.0;
  return t.cols() <= t.rows() ? lambda_max(t.transpose() * t) : lambda_max(t * t.transpose());
}

namespace {

struct Block {
  Eigen::Index first = 0;  // 0-based l - 1
  Eigen::Index last = 0;   // 0-based, inclusive
};

Block degenerate_block(const Cdm& cdm, Eigen::Index k) {
  const Eigen::Index d = cdm.card_x();
  const double tol = gap_tolerance(cdm);
  const double sk = cdm.sigma(k - 1);
  Block b{k - 1, k - 1};
  while (b.first > 0 && cdm.sigma(b.first - 1) - sk <= tol) --b.first;
  while (b.last + 1 < d && sk - cdm.sigma(b.last + 1) <= tol) ++b.last;
  return b;
}

struct JBuilder {
  const Cdm& cdm;
  const Matrix& e;
  Eigen::Index k;
  Block block;
  Matrix g_prev;  // E-space G_{l-1}

  JBuilder(const Cdm& c, const Matrix& em, Eigen::Index kk) : cdm(c), e(em), k(kk), block(degenerate_block(c, kk)) {
    Matrix t = g_factor(cdm, e, block.first);
    g_prev = t * t.transpose();
  }

  Matrix operator()(const Vector& u) const {
    const Eigen::Index nx = cdm.card_x(), ny = cdm.card_y();
    Vector xi_vec = e * u;
    Eigen::Map<const Matrix> xi(xi_vec.data(), ny, nx);
    const Eigen::Index width = block.last - block.first + 1;
    const Matrix phi_i = cdm.phi.middleCols(block.first, width);
    Matrix bx = cdm.b.transpose() * xi;
    SymEig w = sym_eig(phi_i.transpose() * (bx + bx.transpose()) * phi_i);
    Matrix betas = w.vectors.leftCols(k - block.first);
    canonical_signs(betas);
    const Matrix varphi = phi_i * betas;
    const double sk2 = cdm.sigma(k - 1) * cdm.sigma(k - 1);
    Matrix j = g_prev;
    for (Eigen::Index i = 0; i < varphi.cols(); ++i)
      for (Eigen::Index jj = 0; jj < nx; ++jj) {
        if (jj >= block.first && jj <= block.last) continue;
        const double den = sk2 - cdm.sigma(jj) * cdm.sigma(jj);
        Vector col = e.transpose() * vec_outer_sym(cdm.b, varphi.col(i), cdm.phi.col(jj));
        j.noalias() += col * col.transpose() / den;
      }
    return 0.5 * (j + j.transpose());
  }
};

}  // namespace

std::pair<double, double> evaluate_beta(const Cdm& cdm, const Matrix& e, Eigen::Index k, const Vector& u) {
  JBuilder build(cdm, e, k);
  Matrix j = build(u);
  return {u.dot(j * u), lambda_max(j)};
}

BetaResult solve_beta(const Cdm& cdm, const Matrix& e, Eigen::Index k, const BetaConfig& cfg) {
  if (!(cfg.eta > 0.0)) throw Error(ErrorCode::BadRange, "eta must be positive");
  if (cfg.max_iters < 1 || cfg.restarts < 1) throw Error(ErrorCode::BadRange, "max_iters and restarts must be positive");
  JBuilder build(cdm, e, k);
  const Eigen::Index n = e.cols();
  Rng root(cfg.seed);
  BetaResult best;
  best.beta = -std::numeric_limits<double>::infinity();
  for (int rs = 0; rs < cfg.restarts; ++rs) {
    Rng rng = root.stream(static_cast<std::uint64_t>(rs));
    Vector u(n);
    for (Eigen::Index i = 0; i < n; ++i) u(i) = rng.normal();
    u.normalize();
    BetaResult cur;
    double prev = std::numeric_limits<double>::quiet_NaN();
    Vector evaluated = u;
    double top = 0.0;
    for (int it = 0; it < cfg.max_iters; ++it) {
      Matrix j = build(u);
      double beta = u.dot(j * u);
      SymEig eig = sym_eig(j);
      top = eig.values(0);
      evaluated = u;
      cur.trace.push_back(beta);
      cur.beta = beta;
      cur.iterations = it + 1;
      if (it > 0 && std::abs(beta - prev) < cfg.tol) {
        cur.converged = true;
        break;
      }
      prev = beta;
      Eigen::Index s = 1;
      while (s < eig.values.size() && eig.values(s) >= top - 1e-9 * std::abs(top)) ++s;
      const Matrix q = eig.vectors.leftCols(s);
      u += cfg.eta * q * (q.transpose() * u);
      u.normalize();
    }
    cur.lambda_max_j = top;
    cur.xi_tilde = Eigen::Map<const Matrix>(evaluated.data(), evaluated.size(), 1);
    cur.best_restart = rs;
    if (cur.beta > best.beta) best = std::move(cur);
  }
  if (!best.converged) warn("beta solver hit max_iters; returning the best iterate (local optimum only)");
  return best;
}

}  // namespace detail

SupContext make_sup_context(const JointDistribution& dist) {
  SupContext ctx{dist, true_cdm(dist), build_L(dist)};
  return ctx;
}

Matrix build_L(const JointDistribution& dist) {
  if (!dist.strict) throw Error(ErrorCode::NonStrictDistribution, "build_L needs a strict distribution");
  const Eigen::Index nx = dist.card_x(), ny = dist.card_y(), n = nx * ny;
  if (n > kMaxCells) throw Error(ErrorCode::SizeLimit, "|X||Y| exceeds " + std::to_string(kMaxCells));
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index x = 0; x < nx; ++x)
    for (Eigen::Index y = 0; y < ny; ++y) {
      const Eigen::Index row = x * ny + y;
      const double prod = dist.px(x) * dist.py(y);
      const double c = 0.5 * (dist.p(x, y) + prod);
      const double scale = 1.0 / std::sqrt(prod);
      // same x, any y'
      for (Eigen::Index yp = 0; yp < ny; ++yp)
        l(row, x * ny + yp) -= scale * std::sqrt(dist.p(x, yp)) * c / dist.px(x);
      // same y, any x'
      for (Eigen::Index xp = 0; xp < nx; ++xp)
        l(row, xp * ny + y) -= scale * std::sqrt(dist.p(xp, y)) * c / dist.py(y);
      l(row, row) += scale * std::sqrt(dist.p(x, y));
    }
  return l;
}

Vector build_theta(const Cdm& cdm, Eigen::Index i, Eigen::Index j) {
  const Eigen::Index d = cdm.card_x();
  if (i < 1 || j < i || j > d) throw Error(ErrorCode::IndexOutOfRange, "theta needs 1 <= i <= j <= |X|");
  return detail::vec_outer_sym(cdm.b, cdm.phi.col(i - 1), cdm.phi.col(j - 1));
}

AlphaResult alpha_k(const SupContext& ctx, Eigen::Index k) {
  detail::check_k(ctx.cdm, k);
  const Eigen::Index n = ctx.L.cols();
  if (ctx.cdm.is_zero()) return {Matrix::Zero(n, n), 0.0};
  if (degenerate_at(ctx.cdm, k)) throw Error(ErrorCode::DegenerateGap, "sigma_k equals sigma_{k+1}; use beta_k");
  Matrix t = detail::g_factor(ctx.cdm, ctx.L, k);
  AlphaResult out;
  out.G = t * t.transpose();
  out.alpha = lambda_max(out.G);
  return out;
}

AlphaResult alpha_k(const JointDistribution& dist, Eigen::Index k) { return alpha_k(make_sup_context(dist), k); }

double alpha_value(const SupContext& ctx, Eigen::Index k) {
  detail::check_k(ctx.cdm, k);
  if (ctx.cdm.is_zero()) return 0.0;
  if (degenerate_at(ctx.cdm, k)) throw Error(ErrorCode::DegenerateGap, "sigma_k equals sigma_{k+1}; use beta_k");
  return detail::spectral_norm_of_factor(detail::g_factor(ctx.cdm, ctx.L, k));
}

BetaResult beta_k(const SupContext& ctx, Eigen::Index k, const BetaConfig& cfg) {
  detail::check_k(ctx.cdm, k);
  BetaResult res = detail::solve_beta(ctx.cdm, ctx.L, k, cfg);
  Vector flat = Eigen::Map<const Vector>(res.xi_tilde.data(), res.xi_tilde.size());
  res.xi_tilde = Eigen::Map<const Matrix>(flat.data(), ctx.cdm.card_y(), ctx.cdm.card_x());
  return res;
}

BetaResult beta_k(const JointDistribution& dist, Eigen::Index k, const BetaConfig& cfg) {
  return beta_k(make_sup_context(dist), k, cfg);
}

std::pair<double, double> beta_objective(const SupContext& ctx, Eigen::Index k, const Matrix& xi_tilde) {
  detail::check_k(ctx.cdm, k);
  if (xi_tilde.rows() != ctx.cdm.card_y() || xi_tilde.cols() != ctx.cdm.card_x())
    throw Error(ErrorCode::ShapeMismatch, "direction must be |Y| x |X|");
  Vector u = Eigen::Map<const Vector>(xi_tilde.data(), xi_tilde.size());
  return detail::evaluate_beta(ctx.cdm, ctx.L, k, u);
}

namespace {

void finish(ExponentReport& rep, const Cdm& cdm) {
  if (!(rep.alpha_or_beta > 0.0)) {
    rep.infinite = true;
    rep.exponent = std::numeric_limits<double>::infinity();
    rep.normalized = std::numeric_limits<double>::infinity();
    return;
  }
  rep.exponent = 1.0 / (2.0 * rep.alpha_or_beta);
  rep.normalized = cdm.top_hscore(rep.k) * rep.exponent;
}

}  // namespace

ExponentReport exponent(const SupContext& ctx, Eigen::Index k, const ExponentConfig& cfg) {
  detail::check_k(ctx.cdm, k);
  ExponentReport rep;
  rep.k = k;
  rep.gap = ctx.cdm.sigma(k - 1) - ctx.cdm.sigma(k);
  const bool degenerate = degenerate_at(ctx.cdm, k);
  rep.path = cfg.force_path.value_or(degenerate ? ExponentPath::Iterative : ExponentPath::Spectral);
  if (ctx.cdm.is_zero()) {
    rep.alpha_or_beta = 0.0;
  } else if (rep.path == ExponentPath::Spectral) {
    rep.alpha_or_beta = alpha_value(ctx, k);
  } else {
    BetaResult b = beta_k(ctx, k, cfg.beta);
    rep.alpha_or_beta = b.beta;
    rep.beta_config = cfg.beta;
    rep.iterations = b.iterations;
    rep.converged = b.converged;
  }
  finish(rep, ctx.cdm);
  return rep;
}

ExponentReport exponent(const JointDistribution& dist, Eigen::Index k, const ExponentConfig& cfg) {
  return exponent(make_sup_context(dist), k, cfg);
}

SampleBound sample_bound(double alpha_or_beta, Eigen::Index card_x, Eigen::Index card_y, double eps, double delta) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::BadRange, "eps must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::BadRange, "delta must lie in (0,1)");
  if (!(alpha_or_beta > 0.0)) throw Error(ErrorCode::BadRange, "alpha must be positive");
  SampleBound sb{eps, delta, 4.0 * alpha_or_beta, 0.0};
  const double xy = static_cast<double>(card_x) * static_cast<double>(card_y);
  sb.n_bound = sb.t * xy / eps * std::log(6.0 * sb.t * xy / eps) + sb.t / eps * std::log(1.0 / delta);
  return sb;
}

std::vector<TrendRow> trend_experiment(const TrendConfig& cfg) {
  if (cfg.num_dists < 1) throw Error(ErrorCode::BadRange, "num_dists must be at least 1");
  if (cfg.k_max < 1) throw Error(ErrorCode::BadRange, "k_max must be at least 1");
  const std::size_t nk = static_cast<std::size_t>(cfg.k_max);
  std::vector<double> values(cfg.num_dists * nk, std::numeric_limits<double>::quiet_NaN());
  const Rng root(cfg.seed);
  parallel_for(cfg.num_dists, cfg.threads, [&](std::size_t i) {
    Rng rng = root.stream(i);
    JointDistribution dist =
        cfg.generator ? cfg.generator(i, rng) : random_distribution(cfg.card_x, cfg.card_y, rng);
    SupContext ctx = make_sup_context(dist);
    if (cfg.k_max > ctx.d() - 1) throw Error(ErrorCode::IndexOutOfRange, "k_max exceeds |X|-1");
    for (Eigen::Index k = 1; k <= cfg.k_max; ++k) {
      const bool degenerate = degenerate_at(ctx.cdm, k);
      if (degenerate && cfg.policy == DegeneratePolicy::Skip) continue;
      ExponentConfig ec;
      ec.beta = cfg.beta;
      ec.beta.seed = derive_seed(cfg.beta.seed, i);
      ExponentReport rep = exponent(ctx, k, ec);
      if (!rep.infinite) values[i * nk + static_cast<std::size_t>(k - 1)] = rep.normalized;
    }
  });
  std::vector<TrendRow> rows(nk);
  for (std::size_t kk = 0; kk < nk; ++kk) {
    TrendRow& row = rows[kk];
    row.k = static_cast<Eigen::Index>(kk + 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < cfg.num_dists; ++i) {
      double v = values[i * nk + kk];
      if (std::isnan(v)) {
        ++row.skipped;
      } else {
        sum += v;
        ++row.used;
      }
    }
    row.mean_normalized = row.used ? sum / static_cast<double>(row.used) : std::numeric_limits<double>::quiet_NaN();
  }
  std::size_t total_skipped = 0;
  for (const auto& r : rows) total_skipped += r.skipped;
  if (total_skipped) warn("trend: skipped " + std::to_string(total_skipped) + " degenerate (distribution, k) pairs");
  return rows;
}

}  // namespace hgr
