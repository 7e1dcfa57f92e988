#pragma once

#include <cstdint>
#include <vector>

#include "hgr/cdm.hpp"

namespace hgr {

enum class AceMode { Supervised, Semi };

struct AceConfig {
  Eigen::Index k = 1;
  int max_iters = 10000;
  double tol = 1e-10;
  std::uint64_t seed = 0;
};

/// k-dimensional feature functions. Row x of f is f(x), row y of g is g(y);
/// moments are taken under (mu_x, mu_y).
struct FeatureMap {
  Matrix f;
  Matrix g;
  Eigen::Index k = 0;
  Vector mu_x;
  Vector mu_y;
  double rho = 0.0;  // E[f(X)^T g(Y)] after whitening
  int iterations = 0;
  std::vector<double> objective_trace;
};

FeatureMap ace_fit(const EmpiricalCounts& counts, const AceConfig& cfg, AceMode mode = AceMode::Supervised);
/// Fit against an explicit measure, e.g. a known distribution.
FeatureMap ace_fit(const JointMeasure& mu, const AceConfig& cfg);

/// phi(x) = sqrt(mu_x(x)) f(x).
Matrix feature_to_phi(const FeatureMap& fm);
/// f(x) = phi(x)/sqrt(mu_x(x)), zero where mu_x(x) = 0.
Matrix phi_to_feature(const Matrix& phi, const Vector& mu_x);

}  // namespace hgr
