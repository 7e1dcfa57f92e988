#pragma once

#include <string>

#include <json.hpp>

#include "hgr/ace.hpp"
#include "hgr/cdm.hpp"
#include "hgr/dist_core.hpp"
#include "hgr/exponent_semi.hpp"

namespace hgr::io {

using json = nlohmann::json;

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);
json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j);

json distribution_to_json(const JointDistribution& dist);
/// Renormalizes with a warning when the entries are off the simplex by more than 1e-12.
JointDistribution distribution_from_json(const json& j);
JointDistribution load_distribution(const std::string& path);
void save_distribution(const JointDistribution& dist, const std::string& path);

/// CSV with header "x,y"; rows with an empty y are unlabeled. Alphabet sizes
/// are the largest index seen plus one unless given (> 0).
EmpiricalCounts load_samples_csv(const std::string& path, Eigen::Index card_x = 0, Eigen::Index card_y = 0);

json cdm_to_json(const Cdm& cdm);
Cdm cdm_from_json(const json& j);

json feature_map_to_json(const FeatureMap& fm);
FeatureMap feature_map_from_json(const json& j);

json report_to_json(const ExponentReport& rep);
ExponentReport report_from_json(const json& j);

json plan_to_json(const BudgetPlan& plan);
BudgetPlan plan_from_json(const json& j);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// 17 significant digits.
std::string format_double(double v);

}  // namespace hgr::io
