#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "hgr/cli.hpp"
#include "hgr/io.hpp"

using namespace hgr;
namespace fs = std::filesystem;
using io::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("hgr_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

int run(std::vector<std::string> args) { return cli::dispatch(args); }

json load(const std::string& path) { return json::parse(io::read_file(path)); }

// every field the loader keeps comes back unchanged
bool round_trips(const json& emitted, const json& reloaded) {
  for (auto it = reloaded.begin(); it != reloaded.end(); ++it)
    if (!emitted.contains(it.key()) || emitted[it.key()] != it.value()) return false;
  return true;
}

}  // namespace

TEST_CASE("exponent on the equal-diagonal file") {
  TempDir tmp;
  io::save_distribution(cli::equal_diagonal_distribution(), tmp / "vi.json");
  REQUIRE(run({"exponent", "--dist", tmp / "vi.json", "--k", "2", "--out", tmp / "report.json"}) == 0);
  json rep = load(tmp / "report.json");
  CHECK(rep["path"] == "iterative");
  CHECK(std::abs(rep["exponent"].get<double>() - 18.0) < 1e-6);
  CHECK(rep.contains("manifest_hash"));
  CHECK(fs::exists(tmp / "report.json.manifest.json"));
  json man = load(tmp / "report.json.manifest.json");
  CHECK(man["subcommand"] == "exponent");
  CHECK(man["manifest_hash"] == rep["manifest_hash"]);

  ExponentReport back = io::report_from_json(rep);
  CHECK(round_trips(rep, io::report_to_json(back)));
}

TEST_CASE("semi exponent and budget outputs") {
  TempDir tmp;
  io::save_distribution(cli::equal_diagonal_distribution(), tmp / "vi.json");
  REQUIRE(run({"semi-exponent", "--dist", tmp / "vi.json", "--k", "2", "--r", "1", "--out", tmp / "semi.json"}) == 0);
  json semi = load(tmp / "semi.json");
  CHECK(std::abs(semi["exponent"].get<double>() - 36.0) < 1e-6);
  CHECK(semi["upper_bound_ok"] == true);

  REQUIRE(run({"budget", "--dist", tmp / "vi.json", "--k", "3", "--cost-l", "1", "--cost-u", "2", "--budget", "100",
               "--out", tmp / "plan.json"}) == 0);
  json plan = load(tmp / "plan.json");
  CHECK(plan["r_star"] == 0.0);
  CHECK(round_trips(plan, io::plan_to_json(io::plan_from_json(plan))));
}

TEST_CASE("missing input is a usage error") {
  TempDir tmp;
  const std::string missing = tmp / "nope.json";
  std::stringstream err;
  auto* old = std::cerr.rdbuf(err.rdbuf());
  int code = run({"exponent", "--dist", missing, "--k", "2"});
  std::cerr.rdbuf(old);
  CHECK(code == 2);
  CHECK(err.str().find(missing) != std::string::npos);
  CHECK(run({"exponent", "--k", "2"}) == 2);
  CHECK(run({"no-such-command"}) == 2);
  CHECK(run({"exponent", "--dist", missing, "--k", "two"}) == 2);
}

TEST_CASE("computation errors exit 1") {
  TempDir tmp;
  io::save_distribution(cli::equal_diagonal_distribution(), tmp / "vi.json");
  std::stringstream err;
  auto* old = std::cerr.rdbuf(err.rdbuf());
  int code = run({"exponent", "--dist", tmp / "vi.json", "--k", "9"});
  std::cerr.rdbuf(old);
  CHECK(code == 1);
}

TEST_CASE("re-runs are byte identical") {
  TempDir tmp;
  io::save_distribution(cli::equal_diagonal_distribution(), tmp / "vi.json");
  const std::vector<std::string> files = {"errors.csv", "exp.csv", "trend.csv", "rep.json"};
  std::vector<std::string> first;
  for (int i = 0; i < 2; ++i) {
    REQUIRE(run({"simulate", "--dist", tmp / "vi.json", "--k", "2", "--n", "3000", "--trials", "300", "--seed", "4",
                 "--threads", "2", "--out", tmp / "errors.csv", "--exponent-out", tmp / "exp.csv"}) == 0);
    REQUIRE(run({"trend", "--card-x", "4", "--card-y", "3", "--num", "5", "--k-max", "2", "--seed", "2", "--out",
                 tmp / "trend.csv"}) == 0);
    REQUIRE(run({"exponent", "--dist", tmp / "vi.json", "--k", "1", "--seed", "3", "--out", tmp / "rep.json"}) == 0);
    for (std::size_t f = 0; f < files.size(); ++f) {
      std::string text = io::read_file(tmp / files[f]);
      if (i == 0)
        first.push_back(text);
      else
        CHECK_MESSAGE(text == first[f], files[f]);
    }
  }
  std::string exp = first[1];
  CHECK(exp.rfind("# manifest_hash=", 0) == 0);
  CHECK(exp.find("eps,p_hat,exponent_hat,theory_exponent,masked") != std::string::npos);
}

TEST_CASE("the thread count does not change the output") {
  TempDir tmp;
  io::save_distribution(cli::equal_diagonal_distribution(), tmp / "vi.json");
  std::string out[2];
  for (int i = 0; i < 2; ++i) {
    REQUIRE(run({"simulate", "--dist", tmp / "vi.json", "--n", "2000", "--trials", "100", "--seed", "9", "--threads",
                 i == 0 ? "1" : "3", "--out", tmp / "e.csv"}) == 0);
    out[i] = io::read_file(tmp / "e.csv");
  }
  CHECK(out[0] == out[1]);
}

TEST_CASE("simulate preset") {
  TempDir tmp;
  REQUIRE(run({"simulate", "--preset", "paper-vi", "--n", "2000", "--trials", "200", "--out", tmp / "e.csv",
               "--exponent-out", tmp / "x.csv"}) == 0);
  json man = load(tmp / "e.csv.manifest.json");
  CHECK(man["config"]["k"] == 2);
  CHECK(man["config"]["n"] == 2000);
  std::ifstream in(tmp / "e.csv");
  std::string line;
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') ++rows;
  CHECK(rows == 201);
}

TEST_CASE("ace on samples and on a distribution file") {
  TempDir tmp;
  {
    std::ofstream csv(tmp / "s.csv");
    csv << "x,y\n";
    const int xs[] = {0, 0, 1, 1, 2, 2, 0, 1, 2, 2, 1, 0, 0, 1, 2};
    const int ys[] = {0, 0, 1, 1, 2, 2, 1, 2, 0, 2, 1, 0, 0, 1, 2};
    for (int i = 0; i < 15; ++i) csv << xs[i] << ',' << ys[i] << '\n';
    csv << "1,\n2,\n";
  }
  REQUIRE(run({"ace", "--input", tmp / "s.csv", "--k", "1", "--mode", "semi", "--seed", "1", "--out", tmp / "f.json"}) == 0);
  json f = load(tmp / "f.json");
  FeatureMap fm = io::feature_map_from_json(f);
  CHECK(round_trips(f, io::feature_map_to_json(fm)));

  io::save_distribution(cli::equal_diagonal_distribution(), tmp / "vi.json");
  REQUIRE(run({"ace", "--input", tmp / "vi.json", "--k", "2", "--out", tmp / "g.json", "--dump-cdm", tmp / "cdm.json"}) == 0);
  CHECK(std::abs(load(tmp / "g.json")["rho"].get<double>() - 2.0 / 3.0) < 1e-8);
  Cdm c = io::cdm_from_json(load(tmp / "cdm.json"));
  CHECK(c.sigma(0) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("seed comes from the environment when the flag is absent") {
  TempDir tmp;
  setenv("HGR_SEED", "12345", 1);
  int code = run({"trend", "--card-x", "3", "--card-y", "3", "--num", "2", "--k-max", "1", "--out", tmp / "t.csv"});
  unsetenv("HGR_SEED");
  REQUIRE(code == 0);
  CHECK(load(tmp / "t.csv.manifest.json")["seed"] == 12345);
}
