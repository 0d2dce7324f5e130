#include "landing/solver.hpp"

#include "landing/linalg.hpp"
#include "landing/log.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace landing {

namespace {

void require(bool ok, const char* message) {
  if (!ok) fail(ErrorKind::invalid_argument, message);
}

double penalty_from_values(double mu_prev, double slope, double feas, const Vector& x, double rho) {
  if (feas <= feasibility_floor(x)) return mu_prev;
  return std::max(mu_prev, slope / (rho * feas));
}

double min_eigenvalue(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

NormalOperatorChoice effective_operator(NormalOperatorChoice h, NormalStepForm form) {
  if (form == NormalStepForm::gradient) return {NormalOperatorKind::gram_g, 1.0};
  return h;
}

Vector normal_component(const PointGeometry& geo, NormalOperatorChoice h, NormalStepForm form, const Vector& c) {
  if (form == NormalStepForm::gradient)
    return geo.normal_step_gradient(geo.problem().dc_adjoint(geo.x(), c));
  return geo.normal_step_pseudoinverse(h, c);
}

IterationTrace make_row(Index k, double f, double feas, double grad_norm, double mu) {
  IterationTrace row;
  row.k = k;
  row.f = f;
  row.feas = feas;
  row.grad_norm_g = grad_norm;
  row.mu = mu;
  row.merit = f + mu * feas;
  return row;
}

}  // namespace

void LandingConfig::validate() const {
  require(eta > 0.0 && eta < 0.5, "eta must lie in (0, 1/2)");
  require(beta_bt > 0.0 && beta_bt < 1.0, "beta_bt must lie in (0, 1)");
  require(rho > 0.0, "rho must be positive");
  require(mu0 > 0.0, "mu0 must be positive");
  require(grad_tol > 0.0, "grad_tol must be positive");
  require(feas_tol > 0.0, "feas_tol must be positive");
  require(max_iter >= 0, "max_iter must be nonnegative");
  require(max_backtracks >= 0, "max_backtracks must be nonnegative");
  require(rho_check_interval >= 1, "rho_check_interval must be positive");
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "Converged";
    case SolveStatus::max_iterations: return "MaxIterations";
    case SolveStatus::line_search_stalled: return "LineSearchStalled";
    case SolveStatus::rank_deficient: return "RankDeficient";
    case SolveStatus::diverged: return "Diverged";
    case SolveStatus::singular_hessian: return "SingularHessian";
  }
  return "Unknown";
}

double feasibility_floor(const Vector& x) { return 1e-14 * std::max(1.0, x.norm()); }

double merit(const ProblemInstance& prob, double mu, const Vector& x) {
  return prob.f(x) + mu * prob.c(x).norm();
}

double merit_directional_derivative(const ProblemInstance& prob, double mu, const Vector& x, const Vector& d) {
  const Vector c = prob.c(x);
  const double slope = prob.grad_f(x).dot(d);
  const Vector dcd = prob.dc(x, d);
  const double feas = c.norm();
  if (feas == 0.0) return slope + mu * dcd.norm();
  return slope + mu * c.dot(dcd) / feas;
}

double update_penalty(double mu_prev, const ProblemInstance& prob, const Vector& x, const Vector& d_normal,
                      double rho) {
  require(rho > 0.0, "rho must be positive");
  return penalty_from_values(mu_prev, prob.grad_f(x).dot(d_normal), prob.c(x).norm(), x, rho);
}

SolveResult landing_linesearch_solve(const ProblemInstance& prob, const MetricSpec& metric, NormalOperatorChoice h,
                                     const LandingConfig& config, const Vector& x0) {
  config.validate();
  const NormalOperatorChoice h_eff = effective_operator(h, config.normal_form);
  SolveResult result;
  Vector x = x0;
  double mu_prev = config.mu0;
  if (config.record_iterates) result.iterates.push_back(x);

  for (Index k = 0;; ++k) {
    std::optional<PointGeometry> geo;
    try {
      geo.emplace(prob, metric, x);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::rank_deficient) throw;
      result.status = SolveStatus::rank_deficient;
      result.message = e.what();
      break;
    }
    if (k % config.rho_check_interval == 0) {
      const double lam_min = min_eigenvalue(geo->normal_operator(h_eff));
      if (!(config.rho < 0.5 * lam_min)) {
        std::ostringstream msg;
        msg << "rho = " << config.rho << " violates rho < lambda_min(H)/2 = " << 0.5 * lam_min << " at iteration " << k;
        if (k == 0) fail(ErrorKind::invalid_argument, msg.str());
        log().warn("{}", msg.str());
      }
    }

    const double fx = prob.f(x);
    const Vector grad = prob.grad_f(x);
    const Vector c = prob.c(x);
    const double feas = c.norm();
    const Vector d_t = geo->tangent_step(grad);
    const double grad_sq = std::max(0.0, geo->inner(d_t, d_t));
    const Vector d_n = normal_component(*geo, h, config.normal_form, c);
    const double mu = penalty_from_values(mu_prev, grad.dot(d_n), feas, x, config.rho);
    IterationTrace row = make_row(k, fx, feas, std::sqrt(grad_sq), mu);

    if (row.grad_norm_g <= config.grad_tol && feas <= config.feas_tol) {
      result.trace.push_back(row);
      result.status = SolveStatus::converged;
      break;
    }
    if (k >= config.max_iter) {
      result.trace.push_back(row);
      result.status = SolveStatus::max_iterations;
      break;
    }

    const Vector d = d_t + d_n;
    const Vector dcd = geo->jacobian() * d;
    const double dphi = grad.dot(d) + (feas == 0.0 ? mu * dcd.norm() : mu * c.dot(dcd) / feas);
    row.directional_derivative = dphi;
    row.decrease_bound = -grad_sq - config.rho * mu * feas;
    if (dphi > row.decrease_bound + 1e-9)
      log().warn("sufficient-decrease certificate violated at k={}: {} > {}", k, dphi, row.decrease_bound);
    log().debug("k={} f={:.12g} feas={:.3e} grad={:.3e} mu={:.6g} dphi={:.6e}", k, fx, feas, row.grad_norm_g, mu, dphi);

    double alpha = 1.0;
    Index backtracks = 0;
    Vector trial = x + d;
    bool stalled = false;
    while (true) {
      const double phi = merit(prob, mu, trial);
      if (std::isfinite(phi) && phi <= row.merit + config.eta * alpha * dphi) break;
      if (backtracks >= config.max_backtracks) {
        stalled = true;
        break;
      }
      ++backtracks;
      alpha *= config.beta_bt;
      trial = x + alpha * d;
    }
    row.alpha = alpha;
    row.backtracks = backtracks;
    result.trace.push_back(row);
    mu_prev = mu;
    if (stalled) {
      result.status = SolveStatus::line_search_stalled;
      result.message = "no Armijo step after max_backtracks";
      break;
    }
    x = trial;
    ++result.iterations;
    if (config.record_iterates) result.iterates.push_back(x);
  }
  result.final_x = x;
  result.mu_final = result.trace.empty() ? config.mu0 : result.trace.back().mu;
  log().info("landing_ls: {} after {} iterations", to_string(result.status), result.iterations);
  return result;
}

SolveResult landing_fixed_step_solve(const ProblemInstance& prob, const MetricSpec& metric, NormalOperatorChoice h,
                                     double alpha, Index max_iter, const Vector& x0,
                                     const FixedStepOptions& options) {
  require(alpha > 0.0, "alpha must be positive");
  require(options.region_bound > 0.0, "region bound must be positive");
  SolveResult result;
  Vector x = x0;
  if (options.record_iterates) result.iterates.push_back(x);
  for (Index k = 0;; ++k) {
    const Vector c = prob.c(x);
    const double feas = c.norm();
    const double fx = prob.f(x);
    if (!x.allFinite() || !std::isfinite(feas) || feas > options.region_bound) {
      result.trace.push_back(make_row(k, fx, feas, std::nan(""), options.mu));
      result.status = SolveStatus::diverged;
      result.message = "constraint violation left the region bound";
      break;
    }
    std::optional<PointGeometry> geo;
    try {
      geo.emplace(prob, metric, x);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::rank_deficient) throw;
      result.status = SolveStatus::rank_deficient;
      result.message = e.what();
      break;
    }
    const Vector d_t = geo->tangent_step(prob.grad_f(x));
    const Vector d_n = geo->normal_step_pseudoinverse(h, c);
    IterationTrace row = make_row(k, fx, feas, std::sqrt(std::max(0.0, geo->inner(d_t, d_t))), options.mu);
    if (row.grad_norm_g <= options.grad_tol && feas <= options.feas_tol) {
      result.trace.push_back(row);
      result.status = SolveStatus::converged;
      break;
    }
    if (k >= max_iter) {
      result.trace.push_back(row);
      result.status = SolveStatus::max_iterations;
      break;
    }
    row.alpha = alpha;
    result.trace.push_back(row);
    x += alpha * (d_t + d_n);
    ++result.iterations;
    if (options.record_iterates) result.iterates.push_back(x);
  }
  result.final_x = x;
  result.mu_final = options.mu;
  log().info("landing_fixed: {} after {} iterations", to_string(result.status), result.iterations);
  return result;
}

SqpStep sqp_direction(const ProblemInstance& prob, const Vector& x, const Matrix& b) {
  const Index n = prob.dim_e;
  const Index m = prob.dim_f;
  if (b.rows() != n || b.cols() != n) fail(ErrorKind::invalid_argument, "B has wrong dimensions");
  if ((b - b.transpose()).norm() > 1e-12 * std::max(1.0, b.norm()))
    fail(ErrorKind::invalid_argument, "B must be symmetric");
  Eigen::LLT<Matrix> chol(b);
  if (chol.info() != Eigen::Success) fail(ErrorKind::not_positive_definite, "B is not positive definite");
  const Matrix j = dc_matrix(prob, x);
  linalg::split_row_space(j);  // LICQ

  Matrix kkt = Matrix::Zero(n + m, n + m);
  kkt.topLeftCorner(n, n) = b;
  kkt.topRightCorner(n, m) = -j.transpose();
  kkt.bottomLeftCorner(m, n) = j;
  Vector rhs(n + m);
  rhs.head(n) = -prob.grad_f(x);
  rhs.tail(m) = -prob.c(x);
  const Vector sol = Eigen::FullPivLU<Matrix>(kkt).solve(rhs);
  return {sol.head(n), sol.tail(m)};
}

Vector euclidean_multiplier(const ProblemInstance& prob, const Vector& x) {
  const Matrix j = dc_matrix(prob, x);
  linalg::split_row_space(j);
  return linalg::solve_spd(0.5 * (j * j.transpose() + (j * j.transpose()).transpose()), j * prob.grad_f(x));
}

Vector newton_landing_step(const ProblemInstance& prob, const Vector& x, NewtonNormalSpace space) {
  const Matrix j = dc_matrix(prob, x);
  const linalg::RowSpaceSplit split = linalg::split_row_space(j);
  const Vector grad = prob.grad_f(x);
  const Vector c = prob.c(x);
  const Vector lambda = euclidean_multiplier(prob, x);
  const Matrix hess = hess_lagrangian_matrix(prob, x, lambda);
  const Matrix& z = split.null_basis;

  const Matrix reduced = z.transpose() * hess * z;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (reduced + reduced.transpose()));
  const Vector& ev = eig.eigenvalues();
  const double ev_scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev.size() > 0 && ev.cwiseAbs().minCoeff() <= 1e-12 * ev_scale)
    fail(ErrorKind::singular_hessian, "reduced Hessian of the Lagrangian is singular");
  const Vector coeff = eig.eigenvectors() *
                       (ev.cwiseInverse().asDiagonal() * (eig.eigenvectors().transpose() * (z.transpose() * grad)));
  const Vector d_t = -z * coeff;

  Matrix normal = split.row_basis;
  if (space == NewtonNormalSpace::hessian_adapted) normal = linalg::orthogonal_complement(hess * z);
  const Matrix coupling = j * normal;
  Eigen::FullPivLU<Matrix> lu(coupling);
  if (!lu.isInvertible())
    fail(ErrorKind::singular_hessian, "Hessian-adapted normal space is not transversal to ker Dc");
  const Vector d_n = -normal * lu.solve(c);
  return d_t + d_n;
}

namespace {

template <class Step>
SolveResult unit_step_solve(const ProblemInstance& prob, const LandingConfig& config, const Vector& x0,
                            const char* label, Step step) {
  SolveResult result;
  Vector x = x0;
  if (config.record_iterates) result.iterates.push_back(x);
  for (Index k = 0;; ++k) {
    const Vector c = prob.c(x);
    const double feas = c.norm();
    double grad_norm = std::nan("");
    try {
      const linalg::RowSpaceSplit split = linalg::split_row_space(dc_matrix(prob, x));
      grad_norm = (split.null_basis.transpose() * prob.grad_f(x)).norm();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::rank_deficient) throw;
      result.status = SolveStatus::rank_deficient;
      result.message = e.what();
      break;
    }
    IterationTrace row = make_row(k, prob.f(x), feas, grad_norm, config.mu0);
    if (grad_norm <= config.grad_tol && feas <= config.feas_tol) {
      result.trace.push_back(row);
      result.status = SolveStatus::converged;
      break;
    }
    if (k >= config.max_iter) {
      result.trace.push_back(row);
      result.status = SolveStatus::max_iterations;
      break;
    }
    Vector d;
    try {
      d = step(x);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::singular_hessian) throw;
      result.trace.push_back(row);
      result.status = SolveStatus::singular_hessian;
      result.message = e.what();
      break;
    }
    row.alpha = 1.0;
    result.trace.push_back(row);
    x += d;
    ++result.iterations;
    if (config.record_iterates) result.iterates.push_back(x);
    if (!x.allFinite()) {
      result.status = SolveStatus::diverged;
      result.message = "non-finite iterate";
      break;
    }
  }
  result.final_x = x;
  result.mu_final = config.mu0;
  log().info("{}: {} after {} iterations", label, to_string(result.status), result.iterations);
  return result;
}

}  // namespace

SolveResult newton_landing_solve(const ProblemInstance& prob, const LandingConfig& config, const Vector& x0,
                                 NewtonNormalSpace space) {
  config.validate();
  return unit_step_solve(prob, config, x0, "newton_landing",
                         [&](const Vector& x) { return newton_landing_step(prob, x, space); });
}

SolveResult sqp_reference_solve(const ProblemInstance& prob, const LandingConfig& config, const Vector& x0,
                                double b_scale) {
  config.validate();
  require(b_scale > 0.0, "SQP metric scale must be positive");
  const Matrix b = b_scale * Matrix::Identity(prob.dim_e, prob.dim_e);
  return unit_step_solve(prob, config, x0, "sqp_ref", [&](const Vector& x) { return sqp_direction(prob, x, b).d; });
}

namespace {

// Columns G⁻¹ Dcᵀ e_i, i.e. Dc*ᵍ as an n×m matrix.
Matrix metric_adjoint(const PointGeometry& geo) {
  const Matrix& j = geo.jacobian();
  Matrix out(j.cols(), j.rows());
  for (Index i = 0; i < j.rows(); ++i) out.col(i) = geo.metric_inverse_apply(j.row(i).transpose());
  return out;
}

}  // namespace

Vector least_squares_multiplier(const ProblemInstance& prob, const MetricSpec& metric, const Vector& x) {
  const PointGeometry geo(prob, metric, x);
  const Matrix adj = metric_adjoint(geo);
  const Matrix gram = geo.jacobian() * adj;
  return linalg::solve_spd(0.5 * (gram + gram.transpose()), geo.jacobian() * geo.metric_inverse_apply(prob.grad_f(x)));
}

Vector augmented_lagrangian_gradient(const ProblemInstance& prob, const MetricSpec& metric, const Vector& x,
                                     double beta_pen) {
  require(beta_pen > 0.0, "penalty weight must be positive");
  const PointGeometry geo(prob, metric, x);
  const Matrix adj = metric_adjoint(geo);
  const Matrix gram = geo.jacobian() * adj;
  const Vector ambient_grad = geo.metric_inverse_apply(prob.grad_f(x));
  const Vector lambda =
      -linalg::solve_spd(0.5 * (gram + gram.transpose()), geo.jacobian() * ambient_grad);
  return ambient_grad + adj * lambda + beta_pen * (adj * prob.c(x));
}

double penalty_upper_bound_estimate(const ProblemInstance& prob, const MetricSpec& metric, NormalOperatorChoice h,
                                    double rho, double mu0, std::span<const Vector> samples, NormalStepForm form) {
  require(rho > 0.0, "rho must be positive");
  double bound = mu0;
  for (const Vector& x : samples) {
    const Vector c = prob.c(x);
    const double feas = c.norm();
    if (feas <= feasibility_floor(x)) continue;
    const PointGeometry geo(prob, metric, x);
    const Vector d_n = normal_component(geo, h, form, c);
    bound = std::max(bound, prob.grad_f(x).dot(d_n) / (rho * feas));
  }
  return bound;
}

}  // namespace landing
