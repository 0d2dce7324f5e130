#pragma once

#include "landing/oracles.hpp"
#include "landing/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace landing::cli {

enum class SolverKind { landing_ls, landing_fixed, newton_landing, sqp_ref };

/// Parsed run configuration. Relative output paths resolve against base_dir.
struct RunConfig {
  std::string source = "<config>";
  std::filesystem::path base_dir = ".";

  std::string problem_kind = "sphere";
  Index n = 2;
  Index p = 1;
  std::uint64_t problem_seed = 0;
  Vector linear_cost;
  Vector quadratic_diag;

  std::string metric_kind = "euclidean";
  std::optional<double> beta;
  NormalOperatorChoice normal_op;

  SolverKind solver = SolverKind::landing_ls;
  LandingConfig ls;
  std::optional<double> alpha;
  double region_bound = 10.0;
  NewtonNormalSpace newton_space = NewtonNormalSpace::hessian_adapted;

  std::optional<Vector> init_x;
  std::uint64_t init_seed = 0;
  double init_perturbation = 0.1;

  std::filesystem::path output_dir = "out";

  std::map<std::string, int> key_lines;  // key → defining line
};

// Flat `key = value` lines, `#` comments. Throws config_error with "source:line:" context.
RunConfig parse_run_config(std::string_view text, const std::string& source,
                           const std::filesystem::path& base_dir = ".");
RunConfig load_run_config(const std::filesystem::path& path);

struct Setup {
  ProblemInstance prob;
  MetricSpec metric;
  Vector x0;
};

Setup build_setup(const RunConfig& config);
SolveResult execute(const RunConfig& config, const Setup& setup);

int exit_code(SolveStatus status);
inline constexpr int kExitInputError = 4;
inline constexpr int kExitPropertyViolated = 5;

// Columns k,f,feas,grad_norm_g,mu,alpha,merit,backtracks; 17 significant digits.
void write_trace_csv(std::ostream& out, const std::vector<IterationTrace>& trace);
std::string summary_json(const RunConfig& config, const SolveResult& result, const ProblemInstance& prob,
                         double wall_ms);

struct RunReport {
  std::string name;
  int exit_code = kExitInputError;
  std::optional<SolveResult> result;
  double final_f = 0.0;
  double wall_ms = 0.0;
  std::filesystem::path output_dir;
  std::string error;
};

// Loads, solves and writes <out>/trace.csv and <out>/summary.json. Never throws.
RunReport run_config_file(const std::filesystem::path& config_path,
                          const std::optional<std::filesystem::path>& out_override = std::nullopt);

int run_command(const std::filesystem::path& config_path, const std::optional<std::filesystem::path>& out_override,
                std::ostream& out, std::ostream& err);
int verify_command(std::uint64_t seed, SizeProfile profile, bool inject_fault, std::ostream& out, std::ostream& err);
int bench_command(const std::filesystem::path& dir, unsigned jobs, std::ostream& out, std::ostream& err);

}  // namespace landing::cli
