#include "hgr/exponent_semi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "hgr/error.hpp"
#include "hgr/parallel.hpp"
#include "spectral_detail.hpp"

namespace hgr {

Matrix build_M(const JointDistribution& dist) {
  if (!dist.strict) throw Error(ErrorCode::NonStrictDistribution, "build_M needs a strict distribution");
  const Eigen::Index nx = dist.card_x(), ny = dist.card_y();
  Matrix m = Matrix::Zero(nx * ny, nx);
  for (Eigen::Index x = 0; x < nx; ++x)
    for (Eigen::Index y = 0; y < ny; ++y) m(x * ny + y, x) = std::sqrt(dist.p(x, y) / dist.px(x));
  return m;
}

Matrix build_Lbar(const JointDistribution& dist, double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw Error(ErrorCode::BadRange, "r must be a finite nonnegative number");
  const Matrix m = build_M(dist);
  const Eigen::Index n = m.rows(), nx = m.cols();
  if (n > kMaxCells) throw Error(ErrorCode::SizeLimit, "|X||Y| exceeds " + std::to_string(kMaxCells));
  Matrix lb(n, n + nx);
  lb.leftCols(n) = Matrix::Identity(n, n) - (r / (1.0 + r)) * m * m.transpose();
  lb.rightCols(nx) = (std::sqrt(r) / (1.0 + r)) * m;
  return lb;
}

SemiContext make_semi_context(const SupContext& sup, double r) {
  SemiContext ctx{sup, r, build_Lbar(sup.dist, r), {}};
  ctx.E = sup.L * ctx.Lbar;
  return ctx;
}

SemiContext make_semi_context(const JointDistribution& dist, double r) {
  return make_semi_context(make_sup_context(dist), r);
}

AlphaResult alpha_bar(const SemiContext& ctx, Eigen::Index k) {
  const Cdm& cdm = ctx.sup.cdm;
  detail::check_k(cdm, k);
  const Eigen::Index n = ctx.E.cols();
  if (cdm.is_zero()) return {Matrix::Zero(n, n), 0.0};
  if (degenerate_at(cdm, k)) throw Error(ErrorCode::DegenerateGap, "sigma_k equals sigma_{k+1}; use beta_bar");
  Matrix t = detail::g_factor(cdm, ctx.E, k);
  AlphaResult out;
  out.G = t * t.transpose();
  out.alpha = lambda_max(out.G);
  return out;
}

AlphaResult alpha_bar(const JointDistribution& dist, Eigen::Index k, double r) {
  return alpha_bar(make_semi_context(dist, r), k);
}

double alpha_bar_value(const SemiContext& ctx, Eigen::Index k) {
  const Cdm& cdm = ctx.sup.cdm;
  detail::check_k(cdm, k);
  if (cdm.is_zero()) return 0.0;
  if (degenerate_at(cdm, k)) throw Error(ErrorCode::DegenerateGap, "sigma_k equals sigma_{k+1}; use beta_bar");
  return detail::spectral_norm_of_factor(detail::g_factor(cdm, ctx.E, k));
}

namespace {

void split_u(const SemiContext& ctx, BetaResult& res) {
  const Eigen::Index nx = ctx.sup.cdm.card_x(), ny = ctx.sup.cdm.card_y();
  Vector u = Eigen::Map<const Vector>(res.xi_tilde.data(), res.xi_tilde.size());
  res.xi_tilde = Eigen::Map<const Matrix>(u.data(), ny, nx);
  res.xi_m = ctx.r > 0.0 ? Vector(u.tail(nx) / std::sqrt(ctx.r)) : Vector(Vector::Zero(nx));
}

}  // namespace

BetaResult beta_bar(const SemiContext& ctx, Eigen::Index k, const BetaConfig& cfg) {
  detail::check_k(ctx.sup.cdm, k);
  BetaResult res = detail::solve_beta(ctx.sup.cdm, ctx.E, k, cfg);
  split_u(ctx, res);
  return res;
}

BetaResult beta_bar(const JointDistribution& dist, Eigen::Index k, double r, const BetaConfig& cfg) {
  return beta_bar(make_semi_context(dist, r), k, cfg);
}

std::pair<double, double> beta_bar_objective(const SemiContext& ctx, Eigen::Index k, const Matrix& xi_tilde,
                                             const Vector& xi_m) {
  const Cdm& cdm = ctx.sup.cdm;
  detail::check_k(cdm, k);
  const Eigen::Index nx = cdm.card_x(), n = xi_tilde.size();
  if (xi_tilde.rows() != cdm.card_y() || xi_tilde.cols() != nx || xi_m.size() != nx)
    throw Error(ErrorCode::ShapeMismatch, "direction shapes do not match the distribution");
  Vector u(n + nx);
  u.head(n) = Eigen::Map<const Vector>(xi_tilde.data(), n);
  u.tail(nx) = std::sqrt(ctx.r) * xi_m;
  return detail::evaluate_beta(cdm, ctx.E, k, u);
}

double sample_bound_semi(double alpha_bar, Eigen::Index card_x, Eigen::Index card_y, double r, double eps,
                         double delta) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::BadRange, "eps must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::BadRange, "delta must lie in (0,1)");
  if (!(r >= 0.0)) throw Error(ErrorCode::BadRange, "r must be nonnegative");
  if (!(alpha_bar > 0.0)) throw Error(ErrorCode::BadRange, "alpha_bar must be positive");
  const double t = 4.0 * alpha_bar;
  const double cx = static_cast<double>(card_x), cy = static_cast<double>(card_y);
  return t * cx * (1.0 + cy) / eps * std::log(9.0 * t * (1.0 + r) * cx * cy / eps) + t / eps * std::log(1.0 / delta);
}

ExponentReport exponent_semi(const JointDistribution& dist, Eigen::Index k, double r, const ExponentConfig& cfg) {
  SupContext sup = make_sup_context(dist);
  SemiContext ctx = make_semi_context(sup, r);
  const Cdm& cdm = sup.cdm;
  detail::check_k(cdm, k);
  ExponentReport rep;
  rep.k = k;
  rep.r = r;
  rep.gap = cdm.sigma(k - 1) - cdm.sigma(k);
  const bool degenerate = degenerate_at(cdm, k);
  rep.path = cfg.force_path.value_or(degenerate ? ExponentPath::Iterative : ExponentPath::Spectral);
  if (cdm.is_zero()) {
    rep.infinite = true;
    rep.exponent = rep.normalized = std::numeric_limits<double>::infinity();
    rep.supervised_exponent = rep.exponent;
    rep.upper_bound_ok = true;
    return rep;
  }
  if (rep.path == ExponentPath::Spectral) {
    rep.alpha_or_beta = alpha_bar_value(ctx, k);
  } else {
    BetaResult b = beta_bar(ctx, k, cfg.beta);
    rep.alpha_or_beta = b.beta;
    rep.beta_config = cfg.beta;
    rep.iterations = b.iterations;
    rep.converged = b.converged;
  }
  if (!(rep.alpha_or_beta > 0.0)) {
    rep.infinite = true;
    rep.exponent = rep.normalized = std::numeric_limits<double>::infinity();
  } else {
    rep.exponent = 1.0 / (2.0 * rep.alpha_or_beta);
    rep.normalized = cdm.top_hscore(k) * rep.exponent;
  }
  ExponentReport sup_rep = r == 0.0 ? rep : exponent(sup, k, cfg);
  rep.supervised_exponent = sup_rep.exponent;
  // both sides come from separate solves; equality cases need a little room
  rep.upper_bound_ok = rep.exponent <= (1.0 + r) * sup_rep.exponent * (1.0 + 1e-6);
  return rep;
}

BudgetPlan optimal_ratio(const BudgetProblem& bp, const JointDistribution& dist) {
  if (!(bp.cost_labeled > 0.0 && bp.cost_unlabeled > 0.0 && bp.budget > 0.0))
    throw Error(ErrorCode::BadRange, "costs and budget must be positive");
  if (!(bp.r_max > 0.0) || !std::isfinite(bp.r_max)) throw Error(ErrorCode::BadRange, "r_max must be positive");
  if (!(bp.eta > 0.0)) throw Error(ErrorCode::BadRange, "eta must be positive");
  const SupContext sup = make_sup_context(dist);
  detail::check_k(sup.cdm, bp.k);
  BudgetPlan plan;
  plan.path = degenerate_at(sup.cdm, bp.k) && !sup.cdm.is_zero() ? ExponentPath::Iterative : ExponentPath::Spectral;

  // The supervised factor is shared by every r: Ḡ(r) = L̄(r)^T (L^T Θ)(L^T Θ)^T L̄(r).
  Matrix sup_factor;
  if (plan.path == ExponentPath::Spectral && !sup.cdm.is_zero()) sup_factor = detail::g_factor(sup.cdm, sup.L, bp.k);

  auto value_at = [&](double r) {
    if (sup.cdm.is_zero()) return 0.0;
    if (plan.path == ExponentPath::Spectral) {
      Matrix t = build_Lbar(sup.dist, r).transpose() * sup_factor;
      return detail::spectral_norm_of_factor(t);
    }
    return beta_bar(make_semi_context(sup, r), bp.k, bp.beta).beta;
  };
  std::map<double, double> cache;
  auto f = [&](double r) {
    auto it = cache.find(r);
    if (it != cache.end()) return it->second;
    double v = (bp.cost_labeled + r * bp.cost_unlabeled) * value_at(r);
    cache.emplace(r, v);
    return v;
  };

  std::vector<double> grid{0.0};
  const int steps = 40;
  for (int i = 0; i <= steps; ++i) grid.push_back(1e-3 * std::pow(bp.r_max / 1e-3, static_cast<double>(i) / steps));
  grid.back() = bp.r_max;
  std::vector<double> gv(grid.size());
  parallel_for(grid.size(), bp.threads, [&](std::size_t i) {
    gv[i] = (bp.cost_labeled + grid[i] * bp.cost_unlabeled) * value_at(grid[i]);
  });
  for (std::size_t i = 0; i < grid.size(); ++i) cache.emplace(grid[i], gv[i]);
  const double best = *std::min_element(gv.begin(), gv.end());
  double r = grid.back();
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (gv[i] <= best + 1e-9 * std::abs(best)) {
      r = grid[i];
      break;
    }

  auto grad = [&](double at) {
    const double h = 1e-3 * std::max(at, 1.0);
    return (f(at + h) - f(at)) / h;
  };
  int it = 0;
  for (; it < bp.max_iters; ++it) {
    const double g = grad(r);
    if (std::abs(g) < 1e-5) break;
    if ((r <= 0.0 && g > 0.0) || (r >= bp.r_max && g < 0.0)) break;
    double step = bp.eta;
    double fr = f(r), next = r;
    bool moved = false;
    for (int half = 0; half < 60; ++half) {
      next = std::clamp(r - step * g, 0.0, bp.r_max);
      if (f(next) < fr) {
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved || next == r) break;
    r = next;
  }
  plan.iterations = it;
  plan.r_star = r;
  plan.objective = f(r);
  plan.gradient = grad(r);
  plan.boundary = r <= 0.0 || r >= bp.r_max;
  plan.n_labeled = bp.budget / (bp.cost_labeled + r * bp.cost_unlabeled);
  plan.n_unlabeled = r * plan.n_labeled;
  plan.n_labeled_int = static_cast<long long>(std::floor(plan.n_labeled));
  plan.n_unlabeled_int = static_cast<long long>(std::floor(plan.n_unlabeled));
  plan.leftover = bp.budget - static_cast<double>(plan.n_labeled_int) * bp.cost_labeled -
                  static_cast<double>(plan.n_unlabeled_int) * bp.cost_unlabeled;
  return plan;
}

}  // namespace hgr
