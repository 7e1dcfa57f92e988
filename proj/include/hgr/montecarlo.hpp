#pragma once

#include <cstdint>
#include <vector>

#include "hgr/cdm.hpp"

namespace hgr {

struct TrialBatch {
  JointDistribution dist;
  Eigen::Index k = 1;
  std::int64_t n = 0;
  double r = 0.0;
  std::size_t num_trials = 0;
  std::uint64_t seed = 0;
  std::vector<double> errors;
};

struct TrialConfig {
  Eigen::Index k = 2;
  std::int64_t n = 100000;
  double r = 0.0;
  std::size_t num_trials = 10000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// One sampled learning error; trial index i always draws from stream (seed, i).
double run_one_trial(const JointDistribution& dist, const Cdm& truth, const TrialConfig& cfg, std::size_t i);
TrialBatch run_trials(const JointDistribution& dist, const TrialConfig& cfg);

struct EmpiricalExponent {
  std::vector<double> eps;
  std::vector<double> p_hat;
  std::vector<double> exponent_hat;  // NaN where masked
  std::vector<bool> masked;
};

double exceedance(const std::vector<double>& errors, double eps);
EmpiricalExponent empirical_exponent(const TrialBatch& batch, const std::vector<double>& eps_grid);

/// eps values whose exceedance lies in [p_lo, p_hi], ascending.
std::vector<double> auto_eps_grid(const TrialBatch& batch, double p_lo = 0.01, double p_hi = 0.5,
                                  std::size_t points = 12);

/// Largest |p1 - p2| / SE over the grid, comparing the first and second half of the trials.
double half_split_z(const TrialBatch& batch, const std::vector<double>& eps_grid);

}  // namespace hgr
