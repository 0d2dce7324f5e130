#pragma once

#include "landing/errors.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace landing {

struct MatrixShape {
  Index rows = 0;
  Index cols = 0;
};

/// min f(x) subject to c(x) = 0 with x ∈ E = R^dim_e and c(x) ∈ F = R^dim_f.
/// Matrix-valued problems flatten X column-major and record its shape.
/// hess_lagrangian(x, λ, ξ) returns ∇²L(x, λ)[ξ] for L = f − ⟨λ, c⟩; it may be empty.
struct ProblemInstance {
  std::string name;
  Index dim_e = 0;
  Index dim_f = 0;
  std::optional<MatrixShape> shape;
  std::function<double(const Vector&)> f;
  std::function<Vector(const Vector&)> grad_f;
  std::function<Vector(const Vector&)> c;
  std::function<Vector(const Vector&, const Vector&)> dc;
  std::function<Vector(const Vector&, const Vector&)> dc_adjoint;
  std::function<Vector(const Vector&, const Vector&, const Vector&)> hess_lagrangian;
};

// ψ(x) = ½‖c(x)‖²
double infeasibility(const ProblemInstance& prob, const Vector& x);

// ∇²L(x, λ)[ξ]; central differences of ∇L when no analytic Hessian is supplied.
Vector hess_lagrangian_apply(const ProblemInstance& prob, const Vector& x, const Vector& lambda,
                             const Vector& xi);
Matrix hess_lagrangian_matrix(const ProblemInstance& prob, const Vector& x, const Vector& lambda);

// Sym(p) stored as p(p+1)/2 coefficients, off-diagonals scaled by √2 (isometric).
Index sym_dim(Index p);
Vector sym_to_coefficients(const Matrix& s);
Matrix coefficients_to_sym(const Vector& y, Index p);

// View helpers for matrix-shaped points.
Matrix as_matrix(const Vector& x, MatrixShape shape);
Vector as_vector(const Matrix& x);

// f(x) = ⟨linear_cost, x⟩ + ½ Σ q_i x_i² (q empty: no quadratic part), c(x) = ½(‖x‖² − 1).
ProblemInstance make_sphere_problem(Index n, const Vector& linear_cost,
                                    const Vector& quadratic_diag = Vector());

enum class StiefelCost { brockett, procrustes };

// c(X) = ½(XᵀX − I) in Sym(p) coefficients.
// brockett: ½ tr(XᵀAXN), N = diag(p,…,1); procrustes: ½‖AX − B‖².
ProblemInstance make_stiefel_problem(StiefelCost kind, Index n, Index p, std::uint64_t seed);

// Symmetric A used by the Brockett instance with this (n, seed).
Matrix brockett_cost_matrix(Index n, std::uint64_t seed);

// f = ½xᵀQx + qᵀx, c_i = ½xᵀA_i x + b_iᵀx − r_i with random data.
ProblemInstance make_random_quadratic_problem(Index n, Index m, std::uint64_t seed);

// Orthonormal n×p frame plus Gaussian perturbation of the given size (flattened).
Vector stiefel_start_point(Index n, Index p, std::uint64_t seed, double perturbation);

struct ValidationReport {
  Index points = 0;
  double max_gradient_error = 0.0;
  double max_adjoint_error = 0.0;
  double max_linearity_error = 0.0;
  double max_infeasibility_gradient_error = 0.0;
};

inline constexpr double kGradientFdTolerance = 1e-6;
inline constexpr double kAdjointTolerance = 1e-10;
inline constexpr double kLinearityTolerance = 1e-12;

// Checks ∇f and ∇ψ against central differences, the adjoint identity and linearity
// of Dc at every trial point. Throws validation_failed naming the identity and point.
ValidationReport validate_problem(const ProblemInstance& prob, std::span<const Vector> trial_points,
                                  std::uint64_t probe_seed = 0);

}  // namespace landing
