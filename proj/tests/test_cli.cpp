#include "landing/cli.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "test_support.hpp"

using namespace landing;
using namespace landing::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("landing_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSphere =
    "problem.kind = sphere\n"
    "problem.n = 2\n"
    "problem.cost = 1, 0\n"
    "init.x = 0.5, 1.2\n"
    "output.dir = out\n";

const char* kBrockett =
    "problem.kind = brockett\n"
    "problem.n = 20\n"
    "problem.p = 3\n"
    "problem.seed = 7\n"
    "init.seed = 7\n"
    "normal_op.kind = gram_euclid\n"
    "output.dir = out\n";

std::string config_error(const std::string& text) {
  try {
    parse_run_config(text, "test.cfg");
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config_error);
    return e.what();
  }
  ADD_FAILURE() << "expected a config error";
  return {};
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string("\"") + LANDING_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

}  // namespace

TEST(ParseRunConfig, ReadsEveryField) {
  const auto cfg = parse_run_config(
      "# comment line\n"
      "problem.kind = brockett   # trailing comment\n"
      "problem.n = 9\nproblem.p = 2\nproblem.seed = 4\n"
      "metric.kind = beta\nmetric.beta = 0.25\n"
      "normal_op.kind = gram_g\nnormal_op.scale = 2\n"
      "solver.kind = landing_fixed\nfixed.alpha = 0.01\nfixed.region_bound = 3\n"
      "ls.eta = 0.01\nls.max_iter = 77\n"
      "init.seed = 3\ninit.perturbation = 0.2\noutput.dir = results\n",
      "a.cfg");
  EXPECT_EQ(cfg.problem_kind, "brockett");
  EXPECT_EQ(cfg.n, 9);
  EXPECT_EQ(cfg.p, 2);
  EXPECT_EQ(cfg.problem_seed, 4u);
  EXPECT_EQ(cfg.metric_kind, "beta");
  EXPECT_EQ(*cfg.beta, 0.25);
  EXPECT_EQ(cfg.normal_op.kind, NormalOperatorKind::gram_g);
  EXPECT_EQ(cfg.normal_op.scale, 2.0);
  EXPECT_EQ(cfg.solver, SolverKind::landing_fixed);
  EXPECT_EQ(*cfg.alpha, 0.01);
  EXPECT_EQ(cfg.region_bound, 3.0);
  EXPECT_EQ(cfg.ls.eta, 0.01);
  EXPECT_EQ(cfg.ls.max_iter, 77);
  EXPECT_EQ(cfg.init_perturbation, 0.2);
  EXPECT_EQ(cfg.output_dir, "results");
  EXPECT_EQ(cfg.key_lines.at("problem.kind"), 2);
}

TEST(ParseRunConfig, UnknownMetricReportsLine) {
  const std::string msg = config_error("problem.kind = brockett\nproblem.n = 4\nmetric.kind = fast\n");
  EXPECT_NE(msg.find("test.cfg:3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("fast"), std::string::npos) << msg;
}

TEST(ParseRunConfig, BetaIffBetaMetric) {
  config_error("problem.kind = brockett\nproblem.n = 4\nmetric.kind = beta\n");
  config_error("problem.kind = brockett\nproblem.n = 4\nmetric.kind = canonical\nmetric.beta = 1\n");
  config_error("problem.kind = brockett\nproblem.n = 4\nmetric.kind = beta\nmetric.beta = -1\n");
}

TEST(ParseRunConfig, AlphaIffFixedStep) {
  config_error("solver.kind = landing_fixed\n");
  const std::string msg = config_error("problem.n = 2\nfixed.alpha = 0.1\n");
  EXPECT_NE(msg.find("test.cfg:2"), std::string::npos) << msg;
}

TEST(ParseRunConfig, RejectsMalformedInput) {
  EXPECT_NE(config_error("problem.n = 2\nproblem.bogus = 1\n").find("test.cfg:2"), std::string::npos);
  EXPECT_NE(config_error("problem.n = 2\nproblem.n = 3\n").find("duplicate"), std::string::npos);
  EXPECT_NE(config_error("just some words\n").find("test.cfg:1"), std::string::npos);
  config_error("problem.n = two\n");
  config_error("problem.kind = sphere\nmetric.kind = canonical\n");
  config_error("problem.kind = sphere\nproblem.n = 3\ninit.x = 1, 2\n");
  config_error("ls.eta = 0.7\n");
}

TEST(Run, SphereDemo) {
  const fs::path dir = scratch("sphere");
  const auto report = run_config_file(write_file(dir / "sphere.cfg", kSphere));
  ASSERT_TRUE(report.error.empty()) << report.error;
  EXPECT_EQ(report.exit_code, 0);
  EXPECT_NEAR(report.final_f, -1.0, 1e-6);
  EXPECT_EQ(report.output_dir, dir / "out");

  const std::string trace = slurp(dir / "out" / "trace.csv");
  EXPECT_EQ(trace.substr(0, trace.find('\n')), "k,f,feas,grad_norm_g,mu,alpha,merit,backtracks");
  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  for (const char* key : {"status", "iterations", "final_f", "final_feas", "final_grad_norm", "mu_final", "wall_ms"})
    EXPECT_TRUE(summary.contains(key)) << key;
  EXPECT_EQ(summary["status"], "Converged");
}

TEST(Run, BrockettDefault) {
  const fs::path dir = scratch("brockett");
  const auto report = run_config_file(write_file(dir / "b.cfg", kBrockett));
  ASSERT_TRUE(report.error.empty()) << report.error;
  EXPECT_EQ(report.exit_code, 0);
  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  EXPECT_LE(summary["final_feas"].get<double>(), 1e-8);
}

TEST(Run, MalformedConfigIsInputError) {
  const fs::path dir = scratch("bad");
  const auto report = run_config_file(write_file(dir / "bad.cfg", "problem.kind = brockett\nmetric.kind = fast\n"));
  EXPECT_EQ(report.exit_code, kExitInputError);
  EXPECT_NE(report.error.find("bad.cfg:2"), std::string::npos) << report.error;
  EXPECT_EQ(run_config_file(dir / "missing.cfg").exit_code, kExitInputError);
}

TEST(Run, StatusExitCodes) {
  EXPECT_EQ(exit_code(SolveStatus::converged), 0);
  EXPECT_EQ(exit_code(SolveStatus::max_iterations), 2);
  EXPECT_EQ(exit_code(SolveStatus::line_search_stalled), 3);
  const fs::path dir = scratch("maxit");
  const auto report = run_config_file(write_file(dir / "m.cfg", std::string(kSphere) + "ls.max_iter = 2\n"));
  EXPECT_EQ(report.exit_code, 2);
}

TEST(Run, TraceIsByteIdentical) {
  const fs::path dir = scratch("determinism");
  const fs::path cfg = write_file(dir / "b.cfg", kBrockett);
  ASSERT_EQ(run_config_file(cfg, dir / "first").exit_code, 0);
  ASSERT_EQ(run_config_file(cfg, dir / "second").exit_code, 0);
  const std::string a = slurp(dir / "first" / "trace.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir / "second" / "trace.csv"));
}

TEST(Verify, DefaultAndSeededPass) {
  std::ostringstream out, err;
  EXPECT_EQ(verify_command(0, SizeProfile::medium, false, out, err), 0) << err.str();
  EXPECT_NE(out.str().find("pseudoinverse_step_is_gradient_step"), std::string::npos);
  EXPECT_EQ(verify_command(1234, SizeProfile::small, false, out, err), 0) << err.str();
}

TEST(Verify, FaultInjectionExitsFive) {
  std::ostringstream out, err;
  EXPECT_EQ(verify_command(0, SizeProfile::medium, true, out, err), kExitPropertyViolated);
  EXPECT_NE(err.str().find("pseudoinverse_step_is_gradient_step"), std::string::npos) << err.str();
}

TEST(Binary, EndToEnd) {
  const fs::path dir = scratch("binary");
  const fs::path good = write_file(dir / "a_sphere.cfg", kSphere);
  std::string brockett = kBrockett;
  brockett.replace(brockett.find("output.dir = out"), 16, "output.dir = out_b");
  write_file(dir / "b_brockett.cfg", brockett);
  const fs::path bad = write_file(dir / "bad.txt", "metric.kind = fast\n");
  EXPECT_EQ(run_tool("run \"" + good.string() + "\""), 0);
  EXPECT_EQ(run_tool("run \"" + bad.string() + "\""), 4);
  EXPECT_EQ(run_tool("run"), 4);
  EXPECT_EQ(run_tool("verify"), 0);
  EXPECT_EQ(run_tool("verify --seed 1234"), 0);
  EXPECT_EQ(run_tool("verify --inject-fault"), 5);
  EXPECT_EQ(run_tool("verify --profile huge"), 4);
  EXPECT_EQ(run_tool("bench \"" + dir.string() + "\" --jobs 2"), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "trace.csv"));
  EXPECT_TRUE(fs::exists(dir / "out_b" / "summary.json"));
}
