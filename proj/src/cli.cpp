#include "hgr/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "hgr/ace.hpp"
#include "hgr/error.hpp"
#include "hgr/exponent_semi.hpp"
#include "hgr/io.hpp"
#include "hgr/montecarlo.hpp"
#include "hgr/parallel.hpp"

namespace hgr::cli {

using io::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void require_file(const std::string& path, const char* flag) {
  if (path.empty()) throw UsageError(std::string("missing required option ") + flag);
  if (!std::filesystem::is_regular_file(path)) throw UsageError("file not found: " + path);
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

std::uint64_t env_u64(const char* name, std::uint64_t fallback) {
  auto v = env(name);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    unsigned long long x = std::stoull(*v, &used);
    if (used != v->size()) throw std::invalid_argument(name);
    return x;
  } catch (const std::exception&) {
    throw UsageError(std::string("bad value for ") + name + ": " + *v);
  }
}

/// Tracks one run: the resolved config, its hash and the files written.
class Run {
 public:
  Run(std::string subcommand, json config) : subcommand_(std::move(subcommand)), config_(std::move(config)) {
    start_ = std::chrono::steady_clock::now();
  }

  void add_output(const std::string& path) { outputs_.push_back(path); }

  /// Emits JSON either to `path` or stdout, tagging it with the manifest hash.
  void emit_json(json body, const std::string& path) {
    if (!path.empty()) add_output(path);
    body["manifest_hash"] = hash_for_outputs();
    std::string text = body.dump(2) + "\n";
    if (path.empty()) std::cout << text;
    else io::write_file(path, text);
  }

  void emit_csv(const std::string& content, const std::string& path) {
    if (!path.empty()) add_output(path);
    std::string text = "# manifest_hash=" + hash_for_outputs() + "\n" + content;
    if (path.empty()) std::cout << text;
    else io::write_file(path, text);
  }

  void finish(const std::string& primary_out) {
    if (primary_out.empty()) return;
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json manifest = {{"subcommand", subcommand_}, {"config", config_},       {"seed", config_.value("seed", json())},
                     {"version", kVersion},       {"outputs", outputs_},     {"wall_time_s", wall},
                     {"manifest_hash", hash_for_outputs()}};
    io::write_file(primary_out + ".manifest.json", manifest.dump(2) + "\n");
  }

  // Output paths are declared up front so every file can carry the final hash.
  void declare_outputs(std::vector<std::string> paths) {
    for (auto& p : paths)
      if (!p.empty()) declared_.push_back(std::move(p));
  }

 private:
  std::string hash_for_outputs() const {
    json core = {{"subcommand", subcommand_}, {"config", config_}, {"version", kVersion}, {"outputs", declared_}};
    return hex64(fnv1a64(core.dump()));
  }

  std::string subcommand_;
  json config_;
  std::vector<std::string> outputs_;
  std::vector<std::string> declared_;
  std::chrono::steady_clock::time_point start_;
};

ExponentPath parse_path(const std::string& s) {
  if (s == "spectral") return ExponentPath::Spectral;
  if (s == "iterative") return ExponentPath::Iterative;
  throw UsageError("--force-path must be spectral or iterative");
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad --eps-grid entry: " + item);
    }
  }
  if (out.empty()) throw UsageError("--eps-grid is empty");
  return out;
}

struct BetaFlags {
  double eta = 0.1;
  double tol = 1e-13;
  int max_iters = 1000;
  int restarts = 5;

  void attach(CLI::App* app) {
    app->add_option("--eta", eta, "learning rate of the iterative solver");
    app->add_option("--tol", tol, "convergence tolerance on beta");
    app->add_option("--max-iters", max_iters, "iteration cap per restart");
    app->add_option("--restarts", restarts, "random restarts");
  }
  BetaConfig config(std::uint64_t seed) const { return BetaConfig{eta, tol, max_iters, restarts, seed}; }
  json to_json() const { return {{"eta", eta}, {"tol", tol}, {"max_iters", max_iters}, {"restarts", restarts}}; }
};

struct Options {
  // shared
  std::string dist, out, dump_cdm;
  long long k = 1;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  // ace
  std::string input, mode = "sup";
  int ace_iters = 10000;
  double ace_tol = 1e-10;
  // exponent
  std::string force_path;
  BetaFlags beta;
  double eps = 0.0, delta = 0.0;
  // semi / budget
  double r = 0.0;
  double cost_l = 1.0, cost_u = 1.0, budget = 1.0, r_max = 1e3;
  // simulate
  std::string preset, eps_grid, exponent_out;
  long long n = 100000;
  long long trials = 10000;
  double p_lo = 0.01, p_hi = 0.5;
  // trend
  long long card_x = 12, card_y = 10, num = 1000, k_max = 9;
  std::string policy = "skip";
};

std::uint64_t resolve_seed(CLI::Option* opt, std::uint64_t value) {
  return opt->count() ? value : env_u64("HGR_SEED", value);
}

unsigned resolve_threads(CLI::Option* opt, unsigned value) {
  if (opt->count()) return value == 0 ? default_threads() : value;
  return static_cast<unsigned>(env_u64("HGR_THREADS", default_threads()));
}

void maybe_dump_cdm(const std::string& path, const Cdm& cdm, Run& run) {
  if (path.empty()) return;
  run.emit_json(io::cdm_to_json(cdm), path);
}

int run_ace(const Options& o, std::uint64_t seed) {
  require_file(o.input, "--input");
  if (o.mode != "sup" && o.mode != "semi") throw UsageError("--mode must be sup or semi");
  const bool from_json = std::filesystem::path(o.input).extension() == ".json";
  json config = {{"input", o.input}, {"k", o.k}, {"mode", o.mode}, {"seed", seed},
                 {"max_iters", o.ace_iters}, {"tol", o.ace_tol}};
  Run run("ace", config);
  run.declare_outputs({o.out, o.dump_cdm});
  AceConfig cfg{o.k, o.ace_iters, o.ace_tol, seed};
  FeatureMap fm;
  JointMeasure mu;
  if (from_json) {
    JointDistribution dist = io::load_distribution(o.input);
    if (o.mode == "semi") warn("ace: a distribution file has no unlabeled samples; semi equals sup");
    mu = true_measure(dist);
  } else {
    EmpiricalCounts counts = io::load_samples_csv(o.input);
    mu = o.mode == "semi" ? semi_measure(counts) : empirical_measure(counts);
  }
  fm = ace_fit(mu, cfg);
  json body = io::feature_map_to_json(fm);
  body["mode"] = o.mode;
  run.emit_json(body, o.out);
  maybe_dump_cdm(o.dump_cdm, make_cdm(cdm_matrix(mu), from_json ? Provenance::True : o.mode == "semi" ? Provenance::Semi : Provenance::Supervised), run);
  run.finish(o.out);
  return 0;
}

int run_exponent(const Options& o, std::uint64_t seed) {
  require_file(o.dist, "--dist");
  json config = {{"dist", o.dist}, {"k", o.k}, {"seed", seed}, {"force_path", o.force_path}, {"beta", o.beta.to_json()}};
  if (o.eps > 0.0) config["eps"] = o.eps, config["delta"] = o.delta;
  Run run("exponent", config);
  run.declare_outputs({o.out, o.dump_cdm});
  JointDistribution dist = io::load_distribution(o.dist);
  ExponentConfig ec;
  if (!o.force_path.empty()) ec.force_path = parse_path(o.force_path);
  ec.beta = o.beta.config(seed);
  SupContext ctx = make_sup_context(dist);
  ExponentReport rep = exponent(ctx, o.k, ec);
  json body = io::report_to_json(rep);
  body["sigma"] = io::vector_to_json(ctx.cdm.sigma);
  if (o.eps > 0.0 && !rep.infinite) {
    SampleBound sb = sample_bound(rep.alpha_or_beta, dist.card_x(), dist.card_y(), o.eps, o.delta);
    body["sample_bound"] = {{"eps", sb.eps}, {"delta", sb.delta}, {"t", sb.t}, {"n_bound", sb.n_bound}};
  }
  run.emit_json(body, o.out);
  maybe_dump_cdm(o.dump_cdm, ctx.cdm, run);
  run.finish(o.out);
  return 0;
}

int run_semi(const Options& o, std::uint64_t seed) {
  require_file(o.dist, "--dist");
  json config = {{"dist", o.dist}, {"k", o.k}, {"r", o.r}, {"seed", seed}, {"force_path", o.force_path}, {"beta", o.beta.to_json()}};
  if (o.eps > 0.0) config["eps"] = o.eps, config["delta"] = o.delta;
  Run run("semi-exponent", config);
  run.declare_outputs({o.out});
  JointDistribution dist = io::load_distribution(o.dist);
  ExponentConfig ec;
  if (!o.force_path.empty()) ec.force_path = parse_path(o.force_path);
  ec.beta = o.beta.config(seed);
  ExponentReport rep = exponent_semi(dist, o.k, o.r, ec);
  json body = io::report_to_json(rep);
  if (o.eps > 0.0 && !rep.infinite)
    body["sample_bound"] = {{"eps", o.eps}, {"delta", o.delta},
                            {"n_bound", sample_bound_semi(rep.alpha_or_beta, dist.card_x(), dist.card_y(), o.r, o.eps, o.delta)}};
  run.emit_json(body, o.out);
  run.finish(o.out);
  return 0;
}

int run_budget(const Options& o, std::uint64_t seed, unsigned threads) {
  require_file(o.dist, "--dist");
  json config = {{"dist", o.dist}, {"k", o.k}, {"cost_l", o.cost_l}, {"cost_u", o.cost_u},
                 {"budget", o.budget}, {"r_max", o.r_max}, {"seed", seed}, {"beta", o.beta.to_json()}};
  Run run("budget", config);
  run.declare_outputs({o.out});
  JointDistribution dist = io::load_distribution(o.dist);
  BudgetProblem bp;
  bp.cost_labeled = o.cost_l;
  bp.cost_unlabeled = o.cost_u;
  bp.budget = o.budget;
  bp.k = o.k;
  bp.r_max = o.r_max;
  bp.threads = threads;
  bp.beta = o.beta.config(seed);
  BudgetPlan plan = optimal_ratio(bp, dist);
  run.emit_json(io::plan_to_json(plan), o.out);
  run.finish(o.out);
  return 0;
}

int run_simulate(Options o, std::uint64_t seed, unsigned threads, const CLI::App& sub) {
  JointDistribution dist;
  if (!o.preset.empty()) {
    if (o.preset != "paper-vi" && o.preset != "paper-vi-full") throw UsageError("--preset must be paper-vi or paper-vi-full");
    const bool full = o.preset == "paper-vi-full";
    if (!sub.get_option("--k")->count()) o.k = 2;
    if (!sub.get_option("--n")->count()) o.n = full ? 1000000 : 100000;
    if (!sub.get_option("--trials")->count()) o.trials = full ? 100000 : 10000;
    if (o.dist.empty()) dist = equal_diagonal_distribution();
  }
  if (o.preset.empty() || !o.dist.empty()) {
    require_file(o.dist, "--dist");
    dist = io::load_distribution(o.dist);
  }
  if (o.n < 1 || o.trials < 1) throw UsageError("--n and --trials must be positive");
  json config = {{"dist", o.dist.empty() ? json("builtin:" + o.preset) : json(o.dist)},
                 {"preset", o.preset}, {"k", o.k}, {"n", o.n}, {"trials", o.trials}, {"r", o.r},
                 {"seed", seed}, {"eps_grid", o.eps_grid}, {"p_lo", o.p_lo}, {"p_hi", o.p_hi}};
  Run run("simulate", config);
  run.declare_outputs({o.out, o.exponent_out});
  TrialConfig tc{o.k, o.n, o.r, static_cast<std::size_t>(o.trials), seed, threads};
  TrialBatch batch = run_trials(dist, tc);

  std::string errors = "trial,error\n";
  for (std::size_t i = 0; i < batch.errors.size(); ++i)
    errors += std::to_string(i) + "," + io::format_double(batch.errors[i]) + "\n";
  if (!o.out.empty()) run.emit_csv(errors, o.out);

  std::vector<double> grid = o.eps_grid.empty() ? auto_eps_grid(batch, o.p_lo, o.p_hi) : parse_grid(o.eps_grid);
  EmpiricalExponent ee = empirical_exponent(batch, grid);
  ExponentConfig ec;
  ec.beta.seed = seed;
  ExponentReport theory = o.r > 0.0 ? exponent_semi(dist, o.k, o.r, ec) : exponent(dist, o.k, ec);
  std::string csv = "eps,p_hat,exponent_hat,theory_exponent,masked\n";
  for (std::size_t i = 0; i < ee.eps.size(); ++i) {
    csv += io::format_double(ee.eps[i]) + "," + io::format_double(ee.p_hat[i]) + "," +
           (ee.masked[i] ? std::string("insufficient_trials") : io::format_double(ee.exponent_hat[i])) + "," +
           io::format_double(theory.exponent) + "," + (ee.masked[i] ? "1" : "0") + "\n";
  }
  if (!o.exponent_out.empty() || o.out.empty()) run.emit_csv(csv, o.exponent_out);
  run.finish(!o.out.empty() ? o.out : o.exponent_out);
  return 0;
}

int run_trend(const Options& o, std::uint64_t seed, unsigned threads) {
  if (o.policy != "skip" && o.policy != "iterative") throw UsageError("--policy must be skip or iterative");
  json config = {{"card_x", o.card_x}, {"card_y", o.card_y}, {"num", o.num}, {"k_max", o.k_max},
                 {"seed", seed}, {"policy", o.policy}};
  Run run("trend", config);
  run.declare_outputs({o.out});
  TrendConfig tc;
  tc.card_x = o.card_x;
  tc.card_y = o.card_y;
  tc.k_max = o.k_max;
  if (o.num < 1) throw UsageError("--num must be positive");
  tc.num_dists = static_cast<std::size_t>(o.num);
  tc.seed = seed;
  tc.threads = threads;
  tc.policy = o.policy == "skip" ? DegeneratePolicy::Skip : DegeneratePolicy::Iterative;
  tc.beta.seed = seed;
  std::vector<TrendRow> rows = trend_experiment(tc);
  std::string csv = "k,mean_normalized_exponent,used,skipped\n";
  for (const auto& r : rows)
    csv += std::to_string(r.k) + "," + io::format_double(r.mean_normalized) + "," + std::to_string(r.used) + "," +
           std::to_string(r.skipped) + "\n";
  run.emit_csv(csv, o.out);
  run.finish(o.out);
  return 0;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

JointDistribution equal_diagonal_distribution() {
  Matrix p = Matrix::Constant(4, 4, 1.0 / 24.0);
  p.diagonal().setConstant(1.0 / 8.0);
  return JointDistribution::from_matrix(p);
}

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"HGR maximal correlation features and their error exponents", "hgr"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Options o;

  auto* ace = app.add_subcommand("ace", "fit k-dimensional features with ACE");
  ace->add_option("--input", o.input, "samples.csv or dist.json")->required();
  ace->add_option("--k", o.k)->required();
  ace->add_option("--mode", o.mode, "sup or semi");
  auto* ace_seed = ace->add_option("--seed", o.seed);
  ace->add_option("--max-iters", o.ace_iters);
  ace->add_option("--tol", o.ace_tol);
  ace->add_option("--out", o.out, "features.json");
  ace->add_option("--dump-cdm", o.dump_cdm, "write the working CDM as JSON");

  auto* exp = app.add_subcommand("exponent", "supervised error exponent");
  exp->add_option("--dist", o.dist)->required();
  exp->add_option("--k", o.k)->required();
  exp->add_option("--force-path", o.force_path, "spectral or iterative");
  o.beta.attach(exp);
  auto* exp_seed = exp->add_option("--seed", o.seed);
  exp->add_option("--eps", o.eps, "also report the sample bound at this eps");
  exp->add_option("--delta", o.delta);
  exp->add_option("--out", o.out, "report.json");
  exp->add_option("--dump-cdm", o.dump_cdm);

  auto* semi = app.add_subcommand("semi-exponent", "semi-supervised error exponent");
  semi->add_option("--dist", o.dist)->required();
  semi->add_option("--k", o.k)->required();
  semi->add_option("--r", o.r, "unlabeled to labeled ratio")->required();
  semi->add_option("--force-path", o.force_path);
  o.beta.attach(semi);
  auto* semi_seed = semi->add_option("--seed", o.seed);
  semi->add_option("--eps", o.eps);
  semi->add_option("--delta", o.delta);
  semi->add_option("--out", o.out, "report.json");

  auto* budget = app.add_subcommand("budget", "labeled/unlabeled allocation under a budget");
  budget->add_option("--dist", o.dist)->required();
  budget->add_option("--k", o.k)->required();
  budget->add_option("--cost-l", o.cost_l)->required();
  budget->add_option("--cost-u", o.cost_u)->required();
  budget->add_option("--budget", o.budget)->required();
  budget->add_option("--r-max", o.r_max);
  o.beta.attach(budget);
  auto* budget_seed = budget->add_option("--seed", o.seed);
  auto* budget_threads = budget->add_option("--threads", o.threads);
  budget->add_option("--out", o.out, "plan.json");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo learning errors and empirical exponents");
  sim->add_option("--dist", o.dist);
  sim->add_option("--preset", o.preset, "paper-vi or paper-vi-full");
  sim->add_option("--k", o.k);
  sim->add_option("--n", o.n);
  sim->add_option("--trials", o.trials);
  sim->add_option("--r", o.r);
  auto* sim_seed = sim->add_option("--seed", o.seed);
  auto* sim_threads = sim->add_option("--threads", o.threads);
  sim->add_option("--eps-grid", o.eps_grid, "comma separated eps values; default is automatic");
  sim->add_option("--p-lo", o.p_lo);
  sim->add_option("--p-hi", o.p_hi);
  sim->add_option("--out", o.out, "errors.csv");
  sim->add_option("--exponent-out", o.exponent_out, "exponent.csv");

  auto* trend = app.add_subcommand("trend", "mean normalized exponent against k on random distributions");
  trend->add_option("--card-x", o.card_x);
  trend->add_option("--card-y", o.card_y);
  trend->add_option("--num", o.num);
  trend->add_option("--k-max", o.k_max);
  trend->add_option("--policy", o.policy, "skip or iterative for degenerate spectra");
  auto* trend_seed = trend->add_option("--seed", o.seed);
  auto* trend_threads = trend->add_option("--threads", o.threads);
  trend->add_option("--out", o.out, "trend.csv");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*ace) return run_ace(o, resolve_seed(ace_seed, o.seed));
    if (*exp) return run_exponent(o, resolve_seed(exp_seed, o.seed));
    if (*semi) return run_semi(o, resolve_seed(semi_seed, o.seed));
    if (*budget) return run_budget(o, resolve_seed(budget_seed, o.seed), resolve_threads(budget_threads, o.threads));
    if (*sim) return run_simulate(o, resolve_seed(sim_seed, o.seed), resolve_threads(sim_threads, o.threads), *sim);
    if (*trend) return run_trend(o, resolve_seed(trend_seed, o.seed), resolve_threads(trend_threads, o.threads));
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::Parse || e.code() == ErrorCode::Io ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args);
}

}  // namespace hgr::cli
