#include "landing/cli.hpp"

#include "landing/log.hpp"
#include "landing/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace landing::cli {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

class Parser {
 public:
  Parser(const std::string& source, std::map<std::string, std::pair<std::string, int>> entries)
      : source_(source), entries_(std::move(entries)) {}

  [[noreturn]] void error(const std::string& key, const std::string& message) const {
    std::ostringstream msg;
    const auto it = entries_.find(key);
    msg << source_;
    if (it != entries_.end()) msg << ":" << it->second.second;
    msg << ": " << message;
    fail(ErrorKind::config_error, msg.str());
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::optional<std::string> text(const std::string& key) {
    used_.insert(key);
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.first;
  }

  std::optional<double> real(const std::string& key) {
    const auto raw = text(key);
    if (!raw) return std::nullopt;
    return to_real(key, *raw);
  }

  std::optional<long long> integer(const std::string& key) {
    const auto raw = text(key);
    if (!raw) return std::nullopt;
    long long value = 0;
    const auto* end = raw->data() + raw->size();
    const auto res = std::from_chars(raw->data(), end, value);
    if (res.ec != std::errc() || res.ptr != end) error(key, "expected an integer for " + key + ", got '" + *raw + "'");
    return value;
  }

  std::optional<Vector> vector(const std::string& key) {
    const auto raw = text(key);
    if (!raw) return std::nullopt;
    std::vector<double> values;
    std::stringstream ss(*raw);
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(to_real(key, trim(item)));
    if (values.empty()) error(key, key + " must list at least one number");
    return Eigen::Map<Vector>(values.data(), static_cast<Index>(values.size()));
  }

  template <class T>
  T choice(const std::string& key, const std::vector<std::pair<std::string, T>>& options, T fallback,
           const std::string& what) {
    const auto raw = text(key);
    if (!raw) return fallback;
    for (const auto& [name, value] : options)
      if (name == *raw) return value;
    std::string expected;
    for (const auto& [name, value] : options) expected += (expected.empty() ? "" : "|") + name;
    error(key, "unknown " + what + " '" + *raw + "' (expected " + expected + ")");
  }

  void reject_unused() const {
    for (const auto& [key, entry] : entries_)
      if (!used_.count(key)) error(key, "unknown key '" + key + "'");
  }

 private:
  double to_real(const std::string& key, const std::string& raw) const {
    double value = 0.0;
    const auto* end = raw.data() + raw.size();
    const auto res = std::from_chars(raw.data(), end, value);
    if (res.ec != std::errc() || res.ptr != end || !std::isfinite(value))
      error(key, "expected a number for " + key + ", got '" + raw + "'");
    return value;
  }

  std::string source_;
  std::map<std::string, std::pair<std::string, int>> entries_;
  std::set<std::string> used_;
};

}  // namespace

RunConfig parse_run_config(std::string_view text, const std::string& source, const std::filesystem::path& base_dir) {
  std::map<std::string, std::pair<std::string, int>> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    auto located = [&](const std::string& message) {
      fail(ErrorKind::config_error, source + ":" + std::to_string(lineno) + ": " + message);
    };
    if (eq == std::string::npos) located("expected 'key = value', got '" + body + "'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) located("missing key");
    if (value.empty()) located("missing value for '" + key + "'");
    if (entries.count(key)) located("duplicate key '" + key + "'");
    entries[key] = {value, lineno};
  }

  RunConfig cfg;
  cfg.source = source;
  cfg.base_dir = base_dir;
  for (const auto& [key, entry] : entries) cfg.key_lines[key] = entry.second;
  Parser p(source, entries);

  cfg.problem_kind = p.choice<std::string>("problem.kind",
                                           {{"sphere", "sphere"}, {"brockett", "brockett"}, {"procrustes", "procrustes"}},
                                           "sphere", "problem.kind");
  const bool sphere = cfg.problem_kind == "sphere";
  if (const auto v = p.integer("problem.n")) cfg.n = static_cast<Index>(*v);
  if (const auto v = p.integer("problem.p")) {
    if (sphere) p.error("problem.p", "problem.p applies to Stiefel problems only");
    cfg.p = static_cast<Index>(*v);
  } else if (!sphere) {
    cfg.p = 1;
  }
  if (const auto v = p.integer("problem.seed")) {
    if (*v < 0) p.error("problem.seed", "problem.seed must be nonnegative");
    cfg.problem_seed = static_cast<std::uint64_t>(*v);
  }
  if (sphere) {
    if (cfg.n < 2) p.error("problem.n", "sphere problem needs problem.n >= 2");
    cfg.linear_cost = Vector::Zero(cfg.n);
    cfg.linear_cost(0) = 1.0;
    if (const auto v = p.vector("problem.cost")) {
      if (v->size() != cfg.n) p.error("problem.cost", "problem.cost must have problem.n entries");
      cfg.linear_cost = *v;
    }
    if (const auto v = p.vector("problem.quadratic")) {
      if (v->size() != cfg.n) p.error("problem.quadratic", "problem.quadratic must have problem.n entries");
      cfg.quadratic_diag = *v;
    }
  } else {
    for (const char* key : {"problem.cost", "problem.quadratic"})
      if (p.has(key)) p.error(key, std::string(key) + " applies to the sphere problem only");
    if (cfg.p < 1 || cfg.p > cfg.n) p.error("problem.p", "Stiefel problems need 1 <= problem.p <= problem.n");
  }

  cfg.metric_kind = p.choice<std::string>(
      "metric.kind", {{"euclidean", "euclidean"}, {"canonical", "canonical"}, {"beta", "beta"}}, "euclidean", "metric");
  if (const auto v = p.real("metric.beta")) {
    if (cfg.metric_kind != "beta") p.error("metric.beta", "metric.beta is only allowed with metric.kind = beta");
    if (!(*v > 0.0)) p.error("metric.beta", "metric.beta must be positive");
    cfg.beta = *v;
  } else if (cfg.metric_kind == "beta") {
    p.error("metric.kind", "metric.kind = beta requires metric.beta");
  }
  if (sphere && cfg.metric_kind != "euclidean")
    p.error("metric.kind", "metric '" + cfg.metric_kind + "' requires a Stiefel problem");

  cfg.normal_op.kind = p.choice<NormalOperatorKind>("normal_op.kind",
                                                    {{"identity", NormalOperatorKind::identity},
                                                     {"gram_g", NormalOperatorKind::gram_g},
                                                     {"gram_euclid", NormalOperatorKind::gram_euclid}},
                                                    NormalOperatorKind::identity, "normal operator");
  if (const auto v = p.real("normal_op.scale")) {
    if (!(*v > 0.0)) p.error("normal_op.scale", "normal_op.scale must be positive");
    cfg.normal_op.scale = *v;
  }

  cfg.solver = p.choice<SolverKind>("solver.kind",
                                    {{"landing_ls", SolverKind::landing_ls},
                                     {"landing_fixed", SolverKind::landing_fixed},
                                     {"newton_landing", SolverKind::newton_landing},
                                     {"sqp_ref", SolverKind::sqp_ref}},
                                    SolverKind::landing_ls, "solver");
  cfg.ls.normal_form = p.choice<NormalStepForm>(
      "solver.normal_form", {{"pseudoinverse", NormalStepForm::pseudoinverse}, {"gradient", NormalStepForm::gradient}},
      NormalStepForm::pseudoinverse, "normal step form");
  if (const auto v = p.real("fixed.alpha")) {
    if (cfg.solver != SolverKind::landing_fixed)
      p.error("fixed.alpha", "fixed.alpha is only allowed with solver.kind = landing_fixed");
    if (!(*v > 0.0)) p.error("fixed.alpha", "fixed.alpha must be positive");
    cfg.alpha = *v;
  } else if (cfg.solver == SolverKind::landing_fixed) {
    p.error("solver.kind", "solver.kind = landing_fixed requires fixed.alpha");
  }
  if (const auto v = p.real("fixed.region_bound")) {
    if (!(*v > 0.0)) p.error("fixed.region_bound", "fixed.region_bound must be positive");
    cfg.region_bound = *v;
  }
  cfg.newton_space = p.choice<NewtonNormalSpace>(
      "newton.normal_space",
      {{"hessian", NewtonNormalSpace::hessian_adapted}, {"euclidean", NewtonNormalSpace::euclidean}},
      NewtonNormalSpace::hessian_adapted, "Newton normal space");

  if (const auto v = p.real("ls.eta")) cfg.ls.eta = *v;
  if (const auto v = p.real("ls.beta_bt")) cfg.ls.beta_bt = *v;
  if (const auto v = p.real("ls.rho")) cfg.ls.rho = *v;
  if (const auto v = p.real("ls.mu0")) cfg.ls.mu0 = *v;
  if (const auto v = p.real("ls.grad_tol")) cfg.ls.grad_tol = *v;
  if (const auto v = p.real("ls.feas_tol")) cfg.ls.feas_tol = *v;
  if (const auto v = p.integer("ls.max_iter")) cfg.ls.max_iter = static_cast<Index>(*v);
  if (const auto v = p.integer("ls.max_backtracks")) cfg.ls.max_backtracks = static_cast<Index>(*v);
  try {
    cfg.ls.validate();
  } catch (const Error& e) {
    p.error("ls.eta", e.what());
  }

  if (const auto v = p.vector("init.x")) {
    const Index expected = sphere ? cfg.n : cfg.n * cfg.p;
    if (v->size() != expected) p.error("init.x", "init.x must have " + std::to_string(expected) + " entries");
    cfg.init_x = *v;
  }
  if (const auto v = p.integer("init.seed")) {
    if (*v < 0) p.error("init.seed", "init.seed must be nonnegative");
    cfg.init_seed = static_cast<std::uint64_t>(*v);
  }
  if (const auto v = p.real("init.perturbation")) {
    if (*v < 0.0) p.error("init.perturbation", "init.perturbation must be nonnegative");
    cfg.init_perturbation = *v;
  }
  if (const auto v = p.text("output.dir")) cfg.output_dir = *v;
  p.reject_unused();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::config_error, path.string() + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.string(), path.parent_path().empty() ? "." : path.parent_path());
}

Setup build_setup(const RunConfig& cfg) {
  Setup s;
  if (cfg.problem_kind == "sphere") {
    s.prob = make_sphere_problem(cfg.n, cfg.linear_cost, cfg.quadratic_diag);
    if (cfg.init_x) {
      s.x0 = *cfg.init_x;
    } else {
      Rng rng(mix_seed(cfg.init_seed, 0x1417));
      s.x0 = rng.normal_vector(cfg.n);
    }
  } else {
    const StiefelCost cost = cfg.problem_kind == "brockett" ? StiefelCost::brockett : StiefelCost::procrustes;
    s.prob = make_stiefel_problem(cost, cfg.n, cfg.p, cfg.problem_seed);
    s.x0 = cfg.init_x ? *cfg.init_x : stiefel_start_point(cfg.n, cfg.p, cfg.init_seed, cfg.init_perturbation);
  }
  if (cfg.metric_kind == "canonical") {
    s.metric = StiefelCanonicalMetric{};
  } else if (cfg.metric_kind == "beta") {
    s.metric = StiefelBetaMetric{*cfg.beta};
  } else {
    s.metric = EuclideanMetric{};
  }
  return s;
}

SolveResult execute(const RunConfig& cfg, const Setup& s) {
  switch (cfg.solver) {
    case SolverKind::landing_ls:
      return landing_linesearch_solve(s.prob, s.metric, cfg.normal_op, cfg.ls, s.x0);
    case SolverKind::landing_fixed: {
      FixedStepOptions opts;
      opts.region_bound = cfg.region_bound;
      opts.grad_tol = cfg.ls.grad_tol;
      opts.feas_tol = cfg.ls.feas_tol;
      opts.mu = cfg.ls.mu0;
      return landing_fixed_step_solve(s.prob, s.metric, cfg.normal_op, *cfg.alpha, cfg.ls.max_iter, s.x0, opts);
    }
    case SolverKind::newton_landing:
      return newton_landing_solve(s.prob, cfg.ls, s.x0, cfg.newton_space);
    case SolverKind::sqp_ref:
      return sqp_reference_solve(s.prob, cfg.ls, s.x0);
  }
  fail(ErrorKind::invalid_argument, "unknown solver");
}

int exit_code(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return 0;
    case SolveStatus::max_iterations: return 2;
    case SolveStatus::line_search_stalled: return 3;
    case SolveStatus::rank_deficient:
    case SolveStatus::singular_hessian: return 6;
    case SolveStatus::diverged: return 7;
  }
  return 1;
}

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::string_view solver_name(SolverKind s) {
  switch (s) {
    case SolverKind::landing_ls: return "landing_ls";
    case SolverKind::landing_fixed: return "landing_fixed";
    case SolverKind::newton_landing: return "newton_landing";
    case SolverKind::sqp_ref: return "sqp_ref";
  }
  return "unknown";
}

}  // namespace

void write_trace_csv(std::ostream& out, const std::vector<IterationTrace>& trace) {
  out << "k,f,feas,grad_norm_g,mu,alpha,merit,backtracks\n";
  for (const auto& r : trace) {
    out << r.k << ',' << g17(r.f) << ',' << g17(r.feas) << ',' << g17(r.grad_norm_g) << ',' << g17(r.mu) << ','
        << g17(r.alpha) << ',' << g17(r.merit) << ',' << r.backtracks << '\n';
  }
}

std::string summary_json(const RunConfig& cfg, const SolveResult& result, const ProblemInstance& prob, double wall_ms) {
  nlohmann::json j;
  j["status"] = std::string(to_string(result.status));
  j["iterations"] = result.iterations;
  const Vector& x = result.final_x;
  j["final_f"] = number(prob.f(x));
  j["final_feas"] = number(prob.c(x).norm());
  j["final_grad_norm"] = number(result.trace.empty() ? std::nan("") : result.trace.back().grad_norm_g);
  j["mu_final"] = number(result.mu_final);
  j["wall_ms"] = wall_ms;
  j["problem"] = prob.name;
  j["solver"] = std::string(solver_name(cfg.solver));
  j["metric"] = cfg.metric_kind;
  if (!result.message.empty()) j["message"] = result.message;
  return j.dump(2) + "\n";
}

RunReport run_config_file(const std::filesystem::path& config_path,
                          const std::optional<std::filesystem::path>& out_override) {
  RunReport report;
  report.name = config_path.filename().string();
  try {
    const RunConfig cfg = load_run_config(config_path);
    const Setup setup = build_setup(cfg);
    const auto start = std::chrono::steady_clock::now();
    SolveResult result = execute(cfg, setup);
    report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    std::filesystem::path out = out_override ? *out_override : cfg.output_dir;
    if (out.is_relative() && !out_override) out = cfg.base_dir / out;
    std::filesystem::create_directories(out);
    {
      std::ofstream trace(out / "trace.csv", std::ios::binary);
      write_trace_csv(trace, result.trace);
      if (!trace) fail(ErrorKind::config_error, "cannot write " + (out / "trace.csv").string());
    }
    {
      std::ofstream summary(out / "summary.json", std::ios::binary);
      summary << summary_json(cfg, result, setup.prob, report.wall_ms);
      if (!summary) fail(ErrorKind::config_error, "cannot write " + (out / "summary.json").string());
    }
    report.output_dir = out;
    report.exit_code = exit_code(result.status);
    report.final_f = setup.prob.f(result.final_x);
    report.result = std::move(result);
  } catch (const Error& e) {
    report.exit_code = kExitInputError;
    report.error = e.what();
  } catch (const std::exception& e) {
    report.exit_code = kExitInputError;
    report.error = e.what();
  }
  return report;
}

int run_command(const std::filesystem::path& config_path, const std::optional<std::filesystem::path>& out_override,
                std::ostream& out, std::ostream& err) {
  const RunReport r = run_config_file(config_path, out_override);
  if (!r.error.empty()) {
    err << "error: " << r.error << "\n";
    return r.exit_code;
  }
  out << "status " << to_string(r.result->status) << ", iterations " << r.result->iterations << ", f "
      << g17(r.final_f) << ", output " << r.output_dir.string() << "\n";
  return r.exit_code;
}

int verify_command(std::uint64_t seed, SizeProfile profile, bool inject_fault, std::ostream& out, std::ostream& err) {
  EquivalenceOptions opts;
  opts.seed = seed;
  opts.profile = profile;
  opts.inject_adjoint_fault = inject_fault;
  EquivalenceReport report;
  try {
    report = run_equivalence_suite(opts);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  out << std::left << std::setw(44) << "property" << std::setw(16) << "max_deviation" << std::setw(22) << "worst_seed"
      << "result\n";
  for (const auto& p : report.properties) {
    std::ostringstream dev;
    dev << std::scientific << std::setprecision(3) << p.max_deviation;
    out << std::left << std::setw(44) << p.name << std::setw(16) << dev.str() << std::setw(22) << p.worst_seed
        << (p.passed ? "pass" : "FAIL") << "\n";
  }
  out << opts.instances << " instances per property, tolerance " << report.tolerance << ", "
      << std::fixed << std::setprecision(1) << report.elapsed_ms << " ms\n";
  try {
    require_equivalence(report);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitPropertyViolated;
  }
  return 0;
}

int bench_command(const std::filesystem::path& dir, unsigned jobs, std::ostream& out, std::ostream& err) {
  if (!std::filesystem::is_directory(dir)) {
    err << "error: " << dir.string() << " is not a directory\n";
    return kExitInputError;
  }
  std::vector<std::filesystem::path> configs;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".cfg") configs.push_back(entry.path());
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) {
    err << "error: no .cfg files in " << dir.string() << "\n";
    return kExitInputError;
  }
  jobs = std::max(1u, jobs);

  std::vector<RunReport> reports(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) reports[i] = run_config_file(configs[i]);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::min<std::size_t>(jobs, configs.size()); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int code = 0;
  out << std::left << std::setw(28) << "config" << std::setw(20) << "status" << std::setw(12) << "iterations"
      << std::setw(26) << "final_f" << "wall_ms\n";
  for (const auto& r : reports) {
    code = std::max(code, r.exit_code);
    if (!r.error.empty()) {
      out << std::left << std::setw(28) << r.name << "error: " << r.error << "\n";
      continue;
    }
    std::ostringstream wall;
    wall << std::fixed << std::setprecision(1) << r.wall_ms;
    out << std::left << std::setw(28) << r.name << std::setw(20) << to_string(r.result->status) << std::setw(12)
        << r.result->iterations << std::setw(26) << g17(r.final_f) << wall.str() << "\n";
  }
  return code;
}

}  // namespace landing::cli
