#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hgr/dist_core.hpp"

namespace hgr::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes: 0 success, 1 computation error, 2 usage error.
int dispatch(int argc, char** argv);
int dispatch(const std::vector<std::string>& args);

/// The 4x4 example with 1/8 on the diagonal and 1/24 elsewhere.
JointDistribution equal_diagonal_distribution();

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace hgr::cli
