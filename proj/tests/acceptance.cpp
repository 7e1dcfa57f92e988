// End-to-end acceptance run: one line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hgr/ace.hpp"
#include "hgr/cli.hpp"
#include "hgr/exponent_semi.hpp"
#include "hgr/montecarlo.hpp"
#include "hgr/parallel.hpp"
#include "hgr/perturbation.hpp"
#include "oracles.hpp"

using namespace hgr;

namespace {

constexpr double kClosedFormTol = 1e-6;
constexpr double kPropTol = 1e-8;
constexpr double kAceTol = 1e-8;
constexpr double kSlopeFactor = 3.0;
constexpr double kMcRelTol = 0.25;
constexpr double kMcMaxZ = 3.0;
constexpr double kTrendLinearTol = 0.10;
constexpr double kTrendExactTol = 1e-8;
constexpr double kMidpointSlack = 1e-10;
constexpr double kSandwichSlack = 1e-12;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = limit_s <= 0.0 || secs < limit_s;
  const bool ok = o.pass && in_time;
  if (!ok) ++failures;
  std::printf("%s %2d %s: %s [%.2fs%s]\n", ok ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs,
              in_time ? "" : " over time limit");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Matrix random_symmetric(int d, std::mt19937_64& g) {
  std::normal_distribution<double> n;
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = n(g);
  return 0.5 * (a + a.transpose());
}

// trace shift read off eigenbasis overlaps, free of cancellation
double trace_shift(const SymmetricPerturbation& sp, int k, double tau) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sp.a + tau * sp.aprime);
  const int d = static_cast<int>(sp.a.rows());
  Matrix w = sp.v.transpose() * es.eigenvectors().rowwise().reverse();
  double s = 0.0;
  for (int i = 0; i < d; ++i)
    for (int c = 0; c < d; ++c)
      if ((i < k) != (c < k)) s += (i < k ? -sp.lambda(i) : sp.lambda(i)) * w(i, c) * w(i, c);
  return s;
}

Matrix random_direction(const JointDistribution& d, std::mt19937_64& g) {
  std::normal_distribution<double> n;
  Matrix sq = d.p.cwiseSqrt().transpose();
  Matrix xt(sq.rows(), sq.cols());
  for (Eigen::Index i = 0; i < xt.size(); ++i) xt.data()[i] = n(g);
  xt -= sq.cwiseProduct(xt).sum() * sq;
  return xt / xt.norm();
}

Vector random_unlabeled_direction(const JointDistribution& d, std::mt19937_64& g) {
  std::normal_distribution<double> n;
  Vector s = d.px.cwiseSqrt(), v(s.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = n(g);
  v -= s.dot(v) * s;
  return v / v.norm();
}

JointMeasure semi_measure_of(const Matrix& p_hat, const Vector& q, double r) {
  Vector px = oracle::row_sums(p_hat);
  Vector pt = (px + r * q) / (1.0 + r);
  Matrix pxy = p_hat;
  for (Eigen::Index x = 0; x < pxy.rows(); ++x) pxy.row(x) *= pt(x) / px(x);
  return {pxy, pt, oracle::col_sums(pxy)};
}

std::vector<JointDistribution> random_family(Eigen::Index cx, Eigen::Index cy, std::size_t count, std::uint64_t seed) {
  Rng root(seed);
  std::vector<JointDistribution> out;
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = root.stream(i);
    out.push_back(random_distribution(cx, cy, rng));
  }
  return out;
}

Outcome mc_check(double r, double theory, unsigned threads) {
  TrialConfig cfg;
  cfg.k = 2;
  cfg.n = 100000;
  cfg.num_trials = 10000;
  cfg.r = r;
  cfg.seed = r > 0.0 ? 2002 : 1001;
  cfg.threads = threads;
  TrialBatch batch = run_trials(cli::equal_diagonal_distribution(), cfg);
  std::vector<double> grid = auto_eps_grid(batch);
  EmpiricalExponent ee = empirical_exponent(batch, grid);
  double worst = 0.0, lo = INFINITY, hi = -INFINITY;
  bool ok = !grid.empty();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (ee.masked[i]) { ok = false; continue; }
    const double rel = std::abs(ee.exponent_hat[i] - theory) / theory;
    worst = std::max(worst, rel);
    lo = std::min(lo, ee.exponent_hat[i]);
    hi = std::max(hi, ee.exponent_hat[i]);
  }
  const double z = half_split_z(batch, grid);
  ok = ok && worst <= kMcRelTol && z <= kMcMaxZ;
  return {ok, fmt("exponent in [%.3f, %.3f], worst rel dev %.3f", lo, hi, worst) + fmt(" (tol 0.25), half-split z %.2f (tol 3)", z) +
                  ", " + std::to_string(grid.size()) + " eps points"};
}

}  // namespace

int main() {
  const unsigned threads = default_threads();
  const JointDistribution vi = cli::equal_diagonal_distribution();

  criterion(1, "supervised closed-form exponent", 10.0, [&] {
    ExponentReport rep = exponent(vi, 2);
    const bool ok = rep.path == ExponentPath::Iterative && std::abs(rep.exponent - 18.0) < kClosedFormTol;
    return Outcome{ok, fmt("E_2 = %.10f, want 18 (tol 1e-6), iterative path", rep.exponent)};
  });

  criterion(2, "semi-supervised closed-form exponent", 30.0, [&] {
    ExponentReport rep = exponent_semi(vi, 2, 1.0);
    const bool ok = rep.path == ExponentPath::Iterative && std::abs(rep.exponent - 36.0) < kClosedFormTol;
    return Outcome{ok, fmt("E_2(r=1) = %.10f, want 36 (tol 1e-6)", rep.exponent)};
  });

  criterion(3, "alpha_{d-1} closed form sweep", 30.0, [&] {
    double worst = 0.0;
    for (const auto& d : random_family(5, 6, 100, 3)) {
      SupContext ctx = make_sup_context(d);
      const double s1 = ctx.cdm.sigma(0);
      worst = std::max(worst, std::abs(alpha_value(ctx, 4) - s1 * s1 / 4.0));
    }
    return Outcome{worst < kPropTol, fmt("max |alpha_4 - sigma_1^2/4| = %.3g over 100 dists (tol 1e-8)", worst)};
  });

  criterion(4, "alpha_bar closed form, monotone, convex, sandwich", 0.0, [&] {
    const std::vector<double> grid = {0.0, 0.5, 1.0, 2.0, 5.0};
    double worst = 0.0;
    int shape_fail = 0;
    for (const auto& d : random_family(5, 6, 100, 4)) {
      SupContext sup = make_sup_context(d);
      const double s1 = sup.cdm.sigma(0), a0 = alpha_value(sup, 4);
      const double inf = alpha_bar_value(make_semi_context(sup, 1e6), 4);
      std::vector<double> v;
      for (double r : grid) {
        v.push_back(alpha_bar_value(make_semi_context(sup, r), 4));
        worst = std::max(worst, std::abs(v.back() - s1 * s1 / (4.0 * (1.0 + r))));
        if (a0 / (1.0 + r) > v.back() + kSandwichSlack) ++shape_fail;
        if (v.back() > a0 / (1.0 + r) + r / (1.0 + r) * inf + kSandwichSlack) ++shape_fail;
      }
      for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[i - 1] + kSandwichSlack) ++shape_fail;
      for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double mid = alpha_bar_value(make_semi_context(sup, 0.5 * (grid[i] + grid[i + 1])), 4);
        if (mid > 0.5 * (v[i] + v[i + 1]) + kMidpointSlack) ++shape_fail;
      }
    }
    return Outcome{worst < kPropTol && shape_fail == 0,
                   fmt("max closed-form dev %.3g (tol 1e-8), %g shape violations", worst, shape_fail)};
  });

  criterion(5, "ACE matches the SVD H-score", 60.0, [&] {
    double worst = 0.0;
    Rng root(5);
    auto family = random_family(5, 5, 100, 55);
    for (std::size_t i = 0; i < family.size(); ++i) {
      Rng rng = root.stream(i);
      EmpiricalCounts counts = sample_labeled(family[i], 5000, rng);
      Cdm work = empirical_cdm(counts);
      for (int k = 1; k <= 3; ++k) {
        AceConfig cfg;
        cfg.k = k;
        cfg.seed = derive_seed(5, i * 3 + k);
        FeatureMap fm = ace_fit(counts, cfg);
        worst = std::max(worst, std::abs(hscore(work, feature_to_phi(fm)) - work.top_hscore(k)));
      }
    }
    return Outcome{worst < kAceTol, fmt("max |hscore(ACE) - sum sigma^2| = %.3g over 300 fits (tol 1e-8)", worst)};
  });

  criterion(6, "perturbation slope tests", 0.0, [&] {
    std::mt19937_64 g(6);
    int expansion = 0, sup = 0, semi = 0, tried = 0;
    while (tried < 20) {
      Matrix a = random_symmetric(5, g), ap = random_symmetric(5, g);
      auto sp = SymmetricPerturbation::make(a, ap);
      if (sp.lambda(1) - sp.lambda(2) < 0.05) continue;
      ++tried;
      const double coef = trace_expansion_simple(sp, 2);
      auto res = [&](double tau) { return std::abs(trace_shift(sp, 2, tau) + tau * tau * coef) / (tau * tau); };
      expansion += kSlopeFactor * res(1e-4) <= res(1e-3);
    }
    for (int t = 0; t < 20; ++t) {
      auto d = JointDistribution::from_matrix(oracle::random_table(3 + t % 3, 3 + t % 4, g));
      const Matrix b = true_cdm(d).b;
      PerturbationDirection ds{random_direction(d, g), {}};
      const Matrix xi = xi_from_direction(d, ds).xi;
      const double r = 0.5 + t % 3;
      PerturbationDirection dm{random_direction(d, g), random_unlabeled_direction(d, g)};
      const Matrix xibar = xi_from_direction(d, dm, PerturbMode::Semi, r).xi;
      double es[2], em[2];
      int i = 0;
      for (double eps : {1e-4, 1e-6}) {
        Matrix p_hat;
        Vector q;
        empirical_from_perturbation(d, ds, eps, p_hat, q);
        es[i] = ((cdm_matrix({p_hat, oracle::row_sums(p_hat), oracle::col_sums(p_hat)}) - b) / std::sqrt(eps) - xi).norm();
        empirical_from_perturbation(d, dm, eps, p_hat, q);
        em[i] = ((cdm_matrix(semi_measure_of(p_hat, q, r)) - b) / std::sqrt(eps) - xibar).norm();
        ++i;
      }
      sup += kSlopeFactor * es[1] <= es[0];
      semi += kSlopeFactor * em[1] <= em[0];
    }
    return Outcome{expansion == 20 && sup == 20 && semi == 20,
                   fmt("trace expansion %g/20, supervised CDM %g/20, semi CDM %g/20", expansion, sup, semi)};
  });

  criterion(7, "Monte Carlo exponent, supervised", 1200.0, [&] { return mc_check(0.0, 18.0, threads); });
  criterion(7, "Monte Carlo exponent, semi-supervised r=1", 1200.0, [&] { return mc_check(1.0, 36.0, threads); });

  criterion(8, "trend shape", 0.0, [&] {
    TrendConfig inj;
    inj.card_x = inj.card_y = 4;
    inj.k_max = 3;
    inj.num_dists = 10;
    inj.policy = DegeneratePolicy::Iterative;
    inj.threads = threads;
    inj.generator = [&](std::size_t, Rng&) { return vi; };
    double exact = 0.0;
    for (const auto& row : trend_experiment(inj)) exact = std::max(exact, std::abs(row.mean_normalized - 2.0 * row.k));

    TrendConfig cfg;
    cfg.num_dists = 1000;
    cfg.seed = 8;
    cfg.threads = threads;
    auto rows = trend_experiment(cfg);
    // least-squares line through k = 1..3
    double sk = 0, se = 0, skk = 0, ske = 0;
    for (int k = 0; k < 3; ++k) {
      sk += rows[k].k;
      se += rows[k].mean_normalized;
      skk += double(rows[k].k) * rows[k].k;
      ske += rows[k].k * rows[k].mean_normalized;
    }
    const double slope = (3 * ske - sk * se) / (3 * skk - sk * sk), icpt = (se - slope * sk) / 3;
    double lin = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double fit = icpt + slope * rows[k].k;
      lin = std::max(lin, std::abs(rows[k].mean_normalized - fit) / fit);
    }
    auto delta = [&](int k) { return rows[k - 1].mean_normalized - rows[k - 2].mean_normalized; };
    const bool super = delta(8) > delta(7) && delta(9) > delta(8);
    const bool ok = exact < kTrendExactTol && lin <= kTrendLinearTol && slope > 0.0 && super;
    return Outcome{ok, fmt("injected max |E_k - 2k| = %.3g; linear fit dev k<=3 %.4f (tol 0.1)", exact, lin) +
                           fmt("; increments d7=%.4g d8=%.4g d9=%.4g", delta(7), delta(8), delta(9))};
  });

  criterion(9, "sample bound sanity", 0.0, [&] {
    const double eps = 0.02, delta = 0.1;
    SampleBound sb = sample_bound(1.0 / 36.0, 4, 4, eps, delta);
    TrialConfig cfg;
    cfg.k = 2;
    cfg.n = static_cast<std::int64_t>(std::ceil(sb.n_bound));
    cfg.num_trials = 200;
    cfg.seed = 9;
    cfg.threads = threads;
    TrialBatch batch = run_trials(vi, cfg);
    const double p = exceedance(batch.errors, eps);
    return Outcome{p < delta, fmt("n = %.0f, exceedance %.4f (want < 0.1)", double(cfg.n), p)};
  });

  criterion(10, "budget optimizer", 0.0, [&] {
    JointDistribution d = random_family(4, 5, 1, 10).front();
    BudgetProblem bp;
    bp.k = 3;
    bp.budget = 1000.0;
    bp.threads = threads;
    auto solve = [&](double cl, double cu) {
      bp.cost_labeled = cl;
      bp.cost_unlabeled = cu;
      return optimal_ratio(bp, d);
    };
    BudgetPlan a = solve(2, 1), b = solve(1, 2), c = solve(1, 1);
    const bool ok = a.r_star == bp.r_max && a.boundary && b.r_star == 0.0 && c.r_star == 0.0;
    return Outcome{ok, fmt("r* = %g (boundary), %g, %g for costs (2,1), (1,2), (1,1)", a.r_star, b.r_star, c.r_star)};
  });

  std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
