#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hgr/error.hpp"
#include "hgr/montecarlo.hpp"
#include "oracles.hpp"

using namespace hgr;

namespace {

JointDistribution vi() { return JointDistribution::from_matrix(oracle::equal_diagonal()); }

TrialBatch batch_of(std::vector<double> errors, std::int64_t n = 100) {
  TrialBatch b;
  b.n = n;
  b.num_trials = errors.size();
  b.errors = std::move(errors);
  return b;
}

}  // namespace

TEST_CASE("trials are deterministic across runs and thread counts") {
  TrialConfig cfg;
  cfg.n = 2000;
  cfg.num_trials = 64;
  cfg.seed = 77;
  for (double r : {0.0, 1.0}) {
    cfg.r = r;
    cfg.threads = 1;
    TrialBatch a = run_trials(vi(), cfg);
    TrialBatch b = run_trials(vi(), cfg);
    cfg.threads = 4;
    TrialBatch c = run_trials(vi(), cfg);
    CHECK(a.errors == b.errors);
    CHECK(a.errors == c.errors);
    REQUIRE(a.errors.size() == 64);
    for (double e : a.errors) CHECK(e >= -1e-10);
  }
}

TEST_CASE("r = 0 reproduces the supervised pipeline bit for bit") {
  TrialConfig cfg;
  cfg.n = 1500;
  cfg.num_trials = 20;
  cfg.seed = 5;
  TrialBatch batch = run_trials(vi(), cfg);
  Cdm truth = true_cdm(vi());
  for (std::size_t i = 0; i < cfg.num_trials; ++i) {
    Rng labeled = Rng(cfg.seed).stream(i).stream(0);
    EmpiricalCounts counts = sample_labeled(vi(), cfg.n, labeled);
    double sup = learning_error(truth, empirical_cdm(counts).phi_k(2)).error;
    double semi = learning_error(truth, semi_cdm(counts).phi_k(2)).error;
    CHECK(batch.errors[i] == sup);
    CHECK(semi == sup);
  }
}

TEST_CASE("a single labeled sample does not break the pipeline") {
  TrialConfig cfg;
  cfg.n = 1;
  cfg.num_trials = 10;
  for (double r : {0.0, 2.0}) {
    cfg.r = r;
    TrialBatch b = run_trials(vi(), cfg);
    for (double e : b.errors) {
      CHECK(std::isfinite(e));
      CHECK(e >= -1e-10);
      CHECK(e <= 2.0 / 9.0 + 1e-12);
    }
  }
  cfg.n = 0;
  CHECK_THROWS_AS(run_trials(vi(), cfg), Error);
}

TEST_CASE("a huge sample gives a tiny learning error") {
  TrialConfig cfg;
  cfg.n = 10000000;
  cfg.num_trials = 1;
  cfg.seed = 3;
  CHECK(run_trials(vi(), cfg).errors[0] < 1e-4);
}

TEST_CASE("mean learning error decays like 1/n") {
  std::vector<double> logn, logm;
  for (std::int64_t n : {1000, 10000, 100000}) {
    TrialConfig cfg;
    cfg.n = n;
    cfg.num_trials = 400;
    cfg.seed = 11;
    TrialBatch b = run_trials(vi(), cfg);
    double mean = 0.0;
    for (double e : b.errors) mean += e;
    mean /= static_cast<double>(b.errors.size());
    logn.push_back(std::log(static_cast<double>(n)));
    logm.push_back(std::log(mean));
  }
  const double xbar = (logn[0] + logn[1] + logn[2]) / 3, ybar = (logm[0] + logm[1] + logm[2]) / 3;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 3; ++i) {
    sxy += (logn[i] - xbar) * (logm[i] - ybar);
    sxx += (logn[i] - xbar) * (logn[i] - xbar);
  }
  const double slope = sxy / sxx;
  MESSAGE("slope " << slope);
  CHECK(std::abs(slope + 1.0) <= 0.2);
}

TEST_CASE("empirical exponent masking and the certain case") {
  TrialBatch low = batch_of({0.01, 0.02, 0.03});
  EmpiricalExponent e = empirical_exponent(low, {0.1, 0.2});
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(e.masked[i]);
    CHECK(e.p_hat[i] == 0.0);
    CHECK(std::isnan(e.exponent_hat[i]));
  }
  TrialBatch all = batch_of(std::vector<double>(50, 0.1));
  EmpiricalExponent f = empirical_exponent(all, {0.05});
  CHECK(f.p_hat[0] == 1.0);
  CHECK(f.exponent_hat[0] == 0.0);
  CHECK_FALSE(f.masked[0]);

  TrialBatch half = batch_of({0.0, 0.0, 1.0, 1.0}, 10);
  EmpiricalExponent h = empirical_exponent(half, {0.5});
  CHECK(h.exponent_hat[0] == doctest::Approx(std::log(2.0) / 5.0));

  CHECK_THROWS_AS(empirical_exponent(all, {0.2, 0.1}), Error);
  CHECK_THROWS_AS(empirical_exponent(all, {0.0, 0.1}), Error);
}

TEST_CASE("exceedance is non-increasing") {
  TrialConfig cfg;
  cfg.n = 5000;
  cfg.num_trials = 200;
  TrialBatch b = run_trials(vi(), cfg);
  double prev = 1.0;
  for (double eps = 0.0; eps < 0.01; eps += 1e-5) {
    double p = exceedance(b.errors, eps);
    CHECK(p <= prev);
    CHECK(p >= 0.0);
    prev = p;
  }
}

TEST_CASE("automatic grid on uniform and constant errors") {
  std::vector<double> u;
  for (int i = 0; i < 1000; ++i) u.push_back((i + 0.5) / 1000.0);
  std::vector<double> grid = auto_eps_grid(batch_of(u));
  REQUIRE(!grid.empty());
  CHECK(std::is_sorted(grid.begin(), grid.end()));
  CHECK(grid.front() >= 0.49);
  CHECK(grid.back() <= 0.991);
  for (double eps : grid) {
    double p = exceedance(u, eps);
    CHECK(p >= 0.01);
    CHECK(p <= 0.5);
  }
  CHECK_THROWS_AS(auto_eps_grid(batch_of(std::vector<double>(100, 0.3))), Error);
  CHECK_THROWS_AS(auto_eps_grid(batch_of({})), Error);
}

TEST_CASE("automatic grid on a simulated batch sits in the exponential band") {
  TrialConfig cfg;
  cfg.n = 20000;
  cfg.num_trials = 2000;
  cfg.seed = 8;
  TrialBatch b = run_trials(vi(), cfg);
  for (double eps : auto_eps_grid(b)) {
    const double t = cfg.n * eps * 18.0;
    CHECK(t > 0.3);
    CHECK(t < 8.0);
  }
  CHECK(half_split_z(b, auto_eps_grid(b)) < 4.0);
}
