#include "hgr/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hgr/error.hpp"
#include "hgr/parallel.hpp"

namespace hgr {

double run_one_trial(const JointDistribution& dist, const Cdm& truth, const TrialConfig& cfg, std::size_t i) {
  const Rng trial = Rng(cfg.seed).stream(i);
  const std::int64_t m = std::llround(static_cast<double>(cfg.n) * cfg.r);
  EmpiricalCounts counts = sample_both(dist, cfg.n, m, trial);
  Cdm est = m > 0 ? semi_cdm(counts) : empirical_cdm(counts);
  return learning_error(truth, est.phi_k(cfg.k)).error;
}

TrialBatch run_trials(const JointDistribution& dist, const TrialConfig& cfg) {
  if (cfg.n < 1) throw Error(ErrorCode::BadRange, "n must be at least 1");
  if (!(cfg.r >= 0.0)) throw Error(ErrorCode::BadRange, "r must be nonnegative");
  const Cdm truth = true_cdm(dist);
  if (cfg.k < 1 || cfg.k > truth.card_x()) throw Error(ErrorCode::IndexOutOfRange, "k out of range");
  TrialBatch batch{dist, cfg.k, cfg.n, cfg.r, cfg.num_trials, cfg.seed, std::vector<double>(cfg.num_trials)};
  parallel_for(cfg.num_trials, cfg.threads,
               [&](std::size_t i) { batch.errors[i] = run_one_trial(dist, truth, cfg, i); });
  return batch;
}

double exceedance(const std::vector<double>& errors, double eps) {
  if (errors.empty()) return 0.0;
  std::size_t count = 0;
  for (double e : errors) count += e > eps;
  return static_cast<double>(count) / static_cast<double>(errors.size());
}

EmpiricalExponent empirical_exponent(const TrialBatch& batch, const std::vector<double>& eps_grid) {
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0.0)) throw Error(ErrorCode::BadRange, "eps values must be positive");
    if (i > 0 && !(eps_grid[i] > eps_grid[i - 1])) throw Error(ErrorCode::BadRange, "eps grid must be ascending");
  }
  EmpiricalExponent out;
  const double n = static_cast<double>(batch.n);
  for (double eps : eps_grid) {
    const double p = exceedance(batch.errors, eps);
    out.eps.push_back(eps);
    out.p_hat.push_back(p);
    out.masked.push_back(p == 0.0);
    out.exponent_hat.push_back(p > 0.0 ? -std::log(p) / (n * eps) : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

std::vector<double> auto_eps_grid(const TrialBatch& batch, double p_lo, double p_hi, std::size_t points) {
  if (batch.errors.empty()) throw Error(ErrorCode::EmptyRange, "no trials");
  if (!(p_lo > 0.0 && p_lo < p_hi && p_hi < 1.0)) throw Error(ErrorCode::BadRange, "need 0 < p_lo < p_hi < 1");
  std::vector<double> desc = batch.errors;
  std::sort(desc.begin(), desc.end(), std::greater<>());
  const std::size_t n = desc.size();
  std::vector<double> grid;
  for (std::size_t i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
    const double p = p_lo * std::pow(p_hi / p_lo, t);
    const std::size_t idx = std::min(n - 1, static_cast<std::size_t>(std::floor(p * static_cast<double>(n))));
    const double eps = desc[idx];
    if (!(eps > 0.0)) continue;
    const double realized = exceedance(batch.errors, eps);
    if (realized >= p_lo && realized <= p_hi) grid.push_back(eps);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.empty()) throw Error(ErrorCode::EmptyRange, "no eps has exceedance inside the target band");
  return grid;
}

double half_split_z(const TrialBatch& batch, const std::vector<double>& eps_grid) {
  const std::size_t half = batch.errors.size() / 2;
  if (half == 0) throw Error(ErrorCode::EmptyRange, "need at least two trials");
  std::vector<double> a(batch.errors.begin(), batch.errors.begin() + static_cast<std::ptrdiff_t>(half));
  std::vector<double> b(batch.errors.begin() + static_cast<std::ptrdiff_t>(half), batch.errors.end());
  double worst = 0.0;
  for (double eps : eps_grid) {
    const double pa = exceedance(a, eps), pb = exceedance(b, eps);
    const double pooled = exceedance(batch.errors, eps);
    const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / static_cast<double>(a.size()) + 1.0 / static_cast<double>(b.size())));
    if (se > 0.0) worst = std::max(worst, std::abs(pa - pb) / se);
    else if (pa != pb) worst = std::numeric_limits<double>::infinity();
  }
  return worst;
}

}  // namespace hgr
