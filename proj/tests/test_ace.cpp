#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hgr/ace.hpp"
#include "hgr/error.hpp"
#include "oracles.hpp"

using namespace hgr;

namespace {

Matrix svd_projector(const Matrix& b, int k) {
  oracle::Svd s = oracle::svd(b);
  Matrix v = s.phi.leftCols(k);
  return v * v.transpose();
}

void check_invariants(const FeatureMap& fm) {
  Vector mean_f = fm.f.transpose() * fm.mu_x, mean_g = fm.g.transpose() * fm.mu_y;
  CHECK(mean_f.cwiseAbs().maxCoeff() < 1e-8);
  CHECK(mean_g.cwiseAbs().maxCoeff() < 1e-8);
  Matrix cov_f = fm.f.transpose() * fm.mu_x.asDiagonal() * fm.f;
  Matrix cov_g = fm.g.transpose() * fm.mu_y.asDiagonal() * fm.g;
  CHECK((cov_f - Matrix::Identity(fm.k, fm.k)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((cov_g - Matrix::Identity(fm.k, fm.k)).cwiseAbs().maxCoeff() < 1e-8);
}

}  // namespace

TEST_CASE("ACE on the equal-diagonal distribution recovers rho_2 = 2/3") {
  auto d = JointDistribution::from_matrix(oracle::equal_diagonal());
  AceConfig cfg;
  cfg.k = 2;
  cfg.seed = 3;
  FeatureMap fm = ace_fit(true_measure(d), cfg);
  CHECK(fm.rho == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  check_invariants(fm);
}

TEST_CASE("ACE on an independent distribution yields zero correlation") {
  Vector px(3), py(3);
  px << 0.2, 0.3, 0.5;
  py << 0.3, 0.3, 0.4;
  auto d = JointDistribution::from_matrix(px * py.transpose());
  AceConfig cfg;
  cfg.k = 1;
  FeatureMap fm = ace_fit(true_measure(d), cfg);
  CHECK(std::abs(fm.rho) < 1e-12);
  for (double v : fm.objective_trace) CHECK(v <= 1e-10);
  check_invariants(fm);
}

TEST_CASE("ACE subspace matches the SVD subspace") {
  std::mt19937_64 g(101);
  for (int t = 0; t < 100; ++t) {
    const int nx = 3 + t % 4, ny = 3 + (t / 4) % 4;
    auto d = JointDistribution::from_matrix(oracle::random_table(nx, ny, g));
    Rng rng(static_cast<std::uint64_t>(t));
    EmpiricalCounts counts = sample_labeled(d, 2000, rng);
    Cdm truth = true_cdm(d), work = empirical_cdm(counts);
    const int k = 1 + t % 2;
    AceConfig cfg;
    cfg.k = k;
    cfg.seed = static_cast<std::uint64_t>(1000 + t);
    FeatureMap fm = ace_fit(counts, cfg);
    check_invariants(fm);
    Matrix phi = feature_to_phi(fm);
    CHECK(orthonormal_columns(phi, 1e-8));
    CHECK(std::abs(hscore(truth, phi) - hscore(truth, work.phi_k(k))) < 1e-8);
    CHECK((phi * phi.transpose() - svd_projector(work.b, k)).cwiseAbs().maxCoeff() < 1e-7);
    CHECK(fm.rho == doctest::Approx(work.rho(k)).epsilon(1e-6));
  }
}

TEST_CASE("ACE surrogate objective never decreases") {
  std::mt19937_64 g(7);
  auto d = JointDistribution::from_matrix(oracle::random_table(6, 5, g));
  AceConfig cfg;
  cfg.k = 3;
  cfg.seed = 9;
  FeatureMap fm = ace_fit(true_measure(d), cfg);
  for (std::size_t i = 1; i < fm.objective_trace.size(); ++i)
    CHECK(fm.objective_trace[i] >= fm.objective_trace[i - 1] - 1e-14);
}

TEST_CASE("ACE correlation is independent of the initialization") {
  std::mt19937_64 g(8);
  auto d = JointDistribution::from_matrix(oracle::random_table(5, 5, g));
  Cdm c = true_cdm(d);
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    AceConfig cfg;
    cfg.k = 2;
    cfg.seed = seed;
    CHECK(ace_fit(true_measure(d), cfg).rho == doctest::Approx(c.rho(2)).epsilon(1e-6));
  }
}

TEST_CASE("semi ACE without unlabeled data matches supervised ACE") {
  std::mt19937_64 g(12);
  auto d = JointDistribution::from_matrix(oracle::random_table(4, 5, g));
  Rng rng(3);
  EmpiricalCounts counts = sample_labeled(d, 800, rng);
  AceConfig cfg;
  cfg.k = 2;
  Matrix a = feature_to_phi(ace_fit(counts, cfg, AceMode::Supervised));
  Matrix b = feature_to_phi(ace_fit(counts, cfg, AceMode::Semi));
  CHECK((a * a.transpose() - b * b.transpose()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("semi ACE tracks the semi CDM") {
  std::mt19937_64 g(13);
  auto d = JointDistribution::from_matrix(oracle::random_table(4, 4, g));
  Rng rng(5);
  EmpiricalCounts counts = sample_both(d, 800, 1600, rng);
  AceConfig cfg;
  cfg.k = 2;
  FeatureMap fm = ace_fit(counts, cfg, AceMode::Semi);
  Cdm work = semi_cdm(counts);
  Matrix phi = feature_to_phi(fm);
  CHECK((phi * phi.transpose() - svd_projector(work.b, 2)).cwiseAbs().maxCoeff() < 1e-7);
  check_invariants(fm);
}

TEST_CASE("feature and phi conversions") {
  FeatureMap fm;
  fm.k = 3;
  fm.mu_x = Vector::Constant(3, 1.0 / 3.0);
  fm.f = std::sqrt(3.0) * Matrix::Identity(3, 3);
  CHECK((feature_to_phi(fm) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-15);

  std::mt19937_64 g(2);
  Vector mu(4);
  mu << 0.1, 0.2, 0.3, 0.4;
  Matrix phi = oracle::random_orthonormal(4, 2, g);
  FeatureMap back;
  back.mu_x = mu;
  back.f = phi_to_feature(phi, mu);
  CHECK((feature_to_phi(back) - phi).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("ACE rejects a rank-deficient working CDM") {
  // two symbols of X collapse onto one of Y: CDM of rank one
  Matrix collapse(3, 2);
  collapse << 0.2, 0.0, 0.2, 0.0, 0.0, 0.6;
  auto d = JointDistribution::from_matrix(collapse);
  AceConfig cfg;
  cfg.k = 2;
  try {
    ace_fit(true_measure(d), cfg);
    FAIL("expected SingularCovariance");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularCovariance);
  }
}
