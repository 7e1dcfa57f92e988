#include "hgr/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "hgr/error.hpp"

namespace hgr::io {

namespace {

// JSON has no infinity; such values are written as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j, double if_null = std::numeric_limits<double>::infinity()) {
  return j.is_null() ? if_null : j.get<double>();
}

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::True: return "true";
    case Provenance::Supervised: return "supervised";
    case Provenance::Semi: return "semi";
  }
  return "true";
}

}  // namespace

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::Parse, "matrix must be an array of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw Error(ErrorCode::Parse, "ragged matrix row " + std::to_string(i));
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

json vector_to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::Parse, "vector must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

json distribution_to_json(const JointDistribution& dist) {
  return {{"card_x", dist.card_x()}, {"card_y", dist.card_y()}, {"pxy", matrix_to_json(dist.p)}};
}

JointDistribution distribution_from_json(const json& j) {
  try {
    Matrix p = matrix_from_json(j.at("pxy"));
    const auto cx = j.at("card_x").get<Eigen::Index>(), cy = j.at("card_y").get<Eigen::Index>();
    if (p.rows() != cx || p.cols() != cy)
      throw Error(ErrorCode::Parse, "pxy shape does not match card_x/card_y");
    const double total = p.sum();
    if (std::abs(total - 1.0) > 1e-12) warn("distribution sums to " + format_double(total) + "; renormalizing");
    return JointDistribution::from_matrix(p);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("distribution json: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << content;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

JointDistribution load_distribution(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, path + ": " + e.what());
  }
  return distribution_from_json(j);
}

void save_distribution(const JointDistribution& dist, const std::string& path) {
  write_file(path, distribution_to_json(dist).dump(2) + "\n");
}

EmpiricalCounts load_samples_csv(const std::string& path, Eigen::Index card_x, Eigen::Index card_y) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Parse, path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y") throw Error(ErrorCode::Parse, path + ": header must be \"x,y\"");
  std::vector<std::pair<long long, long long>> rows;  // y = -1 for unlabeled
  long long max_x = -1, max_y = -1;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::Parse, path + ":" + std::to_string(lineno) + ": missing comma");
    try {
      std::size_t used = 0;
      const std::string xs = line.substr(0, comma), ys = line.substr(comma + 1);
      long long x = std::stoll(xs, &used);
      if (used != xs.size() || x < 0) throw std::invalid_argument("x");
      long long y = -1;
      if (!ys.empty()) {
        y = std::stoll(ys, &used);
        if (used != ys.size() || y < 0) throw std::invalid_argument("y");
      }
      rows.emplace_back(x, y);
      max_x = std::max(max_x, x);
      max_y = std::max(max_y, y);
    } catch (const std::exception&) {
      throw Error(ErrorCode::Parse, path + ":" + std::to_string(lineno) + ": bad row \"" + line + "\"");
    }
  }
  const Eigen::Index nx = card_x > 0 ? card_x : static_cast<Eigen::Index>(max_x + 1);
  const Eigen::Index ny = card_y > 0 ? card_y : static_cast<Eigen::Index>(max_y + 1);
  if (nx <= 0 || ny <= 0) throw Error(ErrorCode::Parse, path + ": no labeled samples");
  CountMatrix c = CountMatrix::Zero(nx, ny);
  CountVector u = CountVector::Zero(nx);
  for (auto [x, y] : rows) {
    if (x >= nx || y >= ny) throw Error(ErrorCode::IndexOutOfRange, path + ": symbol outside the alphabet");
    if (y < 0) ++u(x);
    else ++c(x, y);
  }
  return EmpiricalCounts(std::move(c), std::move(u));
}

json cdm_to_json(const Cdm& cdm) {
  return {{"b", matrix_to_json(cdm.b)},     {"sigma", vector_to_json(cdm.sigma)},
          {"phi", matrix_to_json(cdm.phi)}, {"psi", matrix_to_json(cdm.psi)},
          {"provenance", provenance_name(cdm.provenance)}, {"r", cdm.r}};
}

Cdm cdm_from_json(const json& j) {
  Cdm c;
  c.b = matrix_from_json(j.at("b"));
  c.sigma = vector_from_json(j.at("sigma"));
  c.phi = matrix_from_json(j.at("phi"));
  c.psi = matrix_from_json(j.at("psi"));
  const std::string p = j.at("provenance").get<std::string>();
  c.provenance = p == "semi" ? Provenance::Semi : p == "supervised" ? Provenance::Supervised : Provenance::True;
  c.r = j.value("r", 0.0);
  return c;
}

json feature_map_to_json(const FeatureMap& fm) {
  json trace = json::array();
  for (double v : fm.objective_trace) trace.push_back(v);
  return {{"k", fm.k},
          {"f", matrix_to_json(fm.f)},
          {"g", matrix_to_json(fm.g)},
          {"mu_x", vector_to_json(fm.mu_x)},
          {"mu_y", vector_to_json(fm.mu_y)},
          {"rho", fm.rho},
          {"iterations", fm.iterations},
          {"objective_trace", trace}};
}

FeatureMap feature_map_from_json(const json& j) {
  FeatureMap fm;
  fm.k = j.at("k").get<Eigen::Index>();
  fm.f = matrix_from_json(j.at("f"));
  fm.g = matrix_from_json(j.at("g"));
  fm.mu_x = vector_from_json(j.at("mu_x"));
  fm.mu_y = vector_from_json(j.at("mu_y"));
  fm.rho = j.at("rho").get<double>();
  fm.iterations = j.at("iterations").get<int>();
  fm.objective_trace = j.at("objective_trace").get<std::vector<double>>();
  return fm;
}

json report_to_json(const ExponentReport& rep) {
  json j = {{"k", rep.k},
            {"path", rep.path == ExponentPath::Spectral ? "spectral" : "iterative"},
            {"alpha_or_beta", rep.alpha_or_beta},
            {"exponent", number(rep.exponent)},
            {"normalized", number(rep.normalized)},
            {"gap", rep.gap},
            {"infinite", rep.infinite},
            {"iterations", rep.iterations},
            {"converged", rep.converged},
            {"r", rep.r}};
  if (rep.beta_config) {
    const BetaConfig& b = *rep.beta_config;
    j["beta_config"] = {{"eta", b.eta}, {"tol", b.tol}, {"max_iters", b.max_iters}, {"restarts", b.restarts}, {"seed", b.seed}};
  }
  if (rep.supervised_exponent) j["supervised_exponent"] = number(*rep.supervised_exponent);
  if (rep.upper_bound_ok) j["upper_bound_ok"] = *rep.upper_bound_ok;
  return j;
}

ExponentReport report_from_json(const json& j) {
  ExponentReport rep;
  rep.k = j.at("k").get<Eigen::Index>();
  rep.path = j.at("path").get<std::string>() == "spectral" ? ExponentPath::Spectral : ExponentPath::Iterative;
  rep.alpha_or_beta = j.at("alpha_or_beta").get<double>();
  rep.exponent = number_from(j.at("exponent"));
  rep.normalized = number_from(j.at("normalized"));
  rep.gap = j.at("gap").get<double>();
  rep.infinite = j.at("infinite").get<bool>();
  rep.iterations = j.at("iterations").get<int>();
  rep.converged = j.at("converged").get<bool>();
  rep.r = j.at("r").get<double>();
  if (j.contains("beta_config")) {
    const json& b = j["beta_config"];
    rep.beta_config = BetaConfig{b.at("eta").get<double>(), b.at("tol").get<double>(), b.at("max_iters").get<int>(),
                                 b.at("restarts").get<int>(), b.at("seed").get<std::uint64_t>()};
  }
  if (j.contains("supervised_exponent")) rep.supervised_exponent = number_from(j["supervised_exponent"]);
  if (j.contains("upper_bound_ok")) rep.upper_bound_ok = j["upper_bound_ok"].get<bool>();
  return rep;
}

json plan_to_json(const BudgetPlan& plan) {
  return {{"r_star", plan.r_star},
          {"n_labeled", plan.n_labeled},
          {"n_unlabeled", plan.n_unlabeled},
          {"n_labeled_int", plan.n_labeled_int},
          {"n_unlabeled_int", plan.n_unlabeled_int},
          {"leftover", plan.leftover},
          {"objective", plan.objective},
          {"gradient", plan.gradient},
          {"boundary", plan.boundary},
          {"path", plan.path == ExponentPath::Spectral ? "spectral" : "iterative"},
          {"iterations", plan.iterations}};
}

BudgetPlan plan_from_json(const json& j) {
  BudgetPlan p;
  p.r_star = j.at("r_star").get<double>();
  p.n_labeled = j.at("n_labeled").get<double>();
  p.n_unlabeled = j.at("n_unlabeled").get<double>();
  p.n_labeled_int = j.at("n_labeled_int").get<long long>();
  p.n_unlabeled_int = j.at("n_unlabeled_int").get<long long>();
  p.leftover = j.at("leftover").get<double>();
  p.objective = j.at("objective").get<double>();
  p.gradient = j.at("gradient").get<double>();
  p.boundary = j.at("boundary").get<bool>();
  p.path = j.at("path").get<std::string>() == "spectral" ? ExponentPath::Spectral : ExponentPath::Iterative;
  p.iterations = j.at("iterations").get<int>();
  return p;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace hgr::io
