#pragma once

#include "landing/metric.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace landing {

enum class NormalStepForm { pseudoinverse, gradient };

struct LandingConfig {
  double eta = 1e-4;       // Armijo parameter, in (0, ½)
  double beta_bt = 0.5;    // backtracking factor, in (0, 1)
  double rho = 0.1;        // must satisfy rho < λ_min(H)/2
  double mu0 = 1.0;
  double grad_tol = 1e-6;
  double feas_tol = 1e-8;
  Index max_iter = 20000;
  Index max_backtracks = 60;
  NormalStepForm normal_form = NormalStepForm::pseudoinverse;
  Index rho_check_interval = 50;
  bool record_iterates = false;

  void validate() const;
};

struct IterationTrace {
  Index k = 0;
  double f = 0.0;
  double feas = 0.0;
  double grad_norm_g = 0.0;
  double mu = 0.0;
  double alpha = 0.0;
  double merit = 0.0;
  Index backtracks = 0;
  // Line-search records only: Dφ_μ(x)[d] and the bound −‖grad‖² − ρμ‖c‖.
  double directional_derivative = 0.0;
  double decrease_bound = 0.0;
};

enum class SolveStatus { converged, max_iterations, line_search_stalled, rank_deficient, diverged, singular_hessian };

std::string_view to_string(SolveStatus status);

struct SolveResult {
  SolveStatus status = SolveStatus::max_iterations;
  Vector final_x;
  std::vector<IterationTrace> trace;
  double mu_final = 0.0;
  Index iterations = 0;
  std::vector<Vector> iterates;  // filled when requested
  std::string message;
};

// Feasibility noise floor: ‖c‖ ≤ 1e-14·max(1, ‖x‖) counts as c = 0.
double feasibility_floor(const Vector& x);

double merit(const ProblemInstance& prob, double mu, const Vector& x);
double merit_directional_derivative(const ProblemInstance& prob, double mu, const Vector& x, const Vector& d);
double update_penalty(double mu_prev, const ProblemInstance& prob, const Vector& x, const Vector& d_normal,
                      double rho);

// Landing with Armijo backtracking on φ_μ = f + μ‖c‖ with adaptive μ.
SolveResult landing_linesearch_solve(const ProblemInstance& prob, const MetricSpec& metric, NormalOperatorChoice h,
                                     const LandingConfig& config, const Vector& x0);

struct FixedStepOptions {
  double region_bound = 10.0;  // Diverged once ‖c‖ exceeds this
  double grad_tol = 1e-6;
  double feas_tol = 1e-8;
  double mu = 1.0;  // weight used for the merit column only
  bool record_iterates = false;
};

SolveResult landing_fixed_step_solve(const ProblemInstance& prob, const MetricSpec& metric, NormalOperatorChoice h,
                                     double alpha, Index max_iter, const Vector& x0,
                                     const FixedStepOptions& options = {});

struct SqpStep {
  Vector d;
  Vector lambda;
};

// KKT solve of min ½dᵀBd + ∇fᵀd s.t. Dc d + c = 0; stationarity Bd + ∇f − Dcᵀλ = 0.
SqpStep sqp_direction(const ProblemInstance& prob, const Vector& x, const Matrix& b);

// Normal space for Newton-landing: (∇²L · T)^⊥ or the Euclidean (ker Dc)^⊥.
enum class NewtonNormalSpace { hessian_adapted, euclidean };

// λ*(x) = (Dc Dcᵀ)⁻¹ Dc ∇f
Vector euclidean_multiplier(const ProblemInstance& prob, const Vector& x);

Vector newton_landing_step(const ProblemInstance& prob, const Vector& x,
                           NewtonNormalSpace space = NewtonNormalSpace::hessian_adapted);

// Unit-step drivers reusing the stopping fields of LandingConfig.
SolveResult newton_landing_solve(const ProblemInstance& prob, const LandingConfig& config, const Vector& x0,
                                 NewtonNormalSpace space = NewtonNormalSpace::hessian_adapted);
SolveResult sqp_reference_solve(const ProblemInstance& prob, const LandingConfig& config, const Vector& x0,
                                double b_scale = 1.0);

// (Dc Dc*ᵍ)⁻¹ Dc G⁻¹∇f
Vector least_squares_multiplier(const ProblemInstance& prob, const MetricSpec& metric, const Vector& x);

// ∇_g L_β(x, λ) for L_β = f + ⟨λ, c⟩ + (β/2)‖c‖² at λ = −least_squares_multiplier.
Vector augmented_lagrangian_gradient(const ProblemInstance& prob, const MetricSpec& metric, const Vector& x,
                                     double beta_pen);

// max(μ₀, max over infeasible samples of Df(x)[d_N(x)] / (ρ‖c(x)‖)).
double penalty_upper_bound_estimate(const ProblemInstance& prob, const MetricSpec& metric, NormalOperatorChoice h,
                                    double rho, double mu0, std::span<const Vector> samples,
                                    NormalStepForm form = NormalStepForm::pseudoinverse);

}  // namespace landing
