#pragma once

#include "landing/errors.hpp"
#include "landing/normal_operator.hpp"
#include "landing/problem.hpp"

#include <functional>
#include <variant>

namespace landing {

/// Field of oblique projectors onto ker Dc(x). The callback returns Proj_x as a dense
/// dim_e×dim_e matrix; it receives the materialized Dc(x) to avoid re-evaluating it.
struct ObliqueProjectorField {
  std::function<Matrix(const Vector& x, const Matrix& dc)> matrix;
};

// Euclidean orthogonal projector onto ker Dc(x).
ObliqueProjectorField orthogonal_projector_field();
// Proj = I − N (Dc N)⁻¹ Dc for a normal-space basis N(x) transversal to ker Dc(x).
ObliqueProjectorField projector_from_normal_space(
    std::function<Matrix(const Vector& x, const Matrix& dc)> normal_basis);
// Stiefel oblique projector Proj Z = X A⁻¹ skew(XᵀZ) + (I − Π)Z.
ObliqueProjectorField stiefel_projector_field(MatrixShape shape);

// Symmetric operator on E as a dense matrix depending on x.
using OperatorField = std::function<Matrix(const Vector& x)>;

OperatorField identity_operator_field(Index dim);
OperatorField constant_operator_field(Matrix op);

struct EuclideanMetric {};
struct ConstructedMetric {
  ObliqueProjectorField projector;
  OperatorField tangent_restriction;  // G_T
  OperatorField normal_restriction;   // G_N
};
struct StiefelCanonicalMetric {};
struct StiefelBetaMetric {
  double beta = 1.0;
};

using MetricSpec = std::variant<EuclideanMetric, ConstructedMetric, StiefelCanonicalMetric, StiefelBetaMetric>;

// Stiefel metrics as explicit (Proj, G_T, G_N) constructions.
ConstructedMetric stiefel_canonical_construction(MatrixShape shape);
ConstructedMetric stiefel_beta_construction(MatrixShape shape, double beta);

/// Everything the landing formulas need at a single point x ∈ 𝒟, assembled once.
/// Tangent basis Z: SVD null space of Dc(x). Normal basis: Proj^⊥ applied to the
/// row-space basis. G(x)⁻¹ = Proj G̃_T⁻¹ Projᵀ + Proj^⊥ G̃_N⁻¹ Proj^⊥ᵀ with both
/// inverses taken on those bases.
class PointGeometry {
 public:
  PointGeometry(const ProblemInstance& prob, const MetricSpec& metric, const Vector& x);

  const ProblemInstance& problem() const { return *prob_; }
  const Vector& x() const { return x_; }
  bool euclidean() const { return euclidean_; }
  const Matrix& jacobian() const { return jacobian_; }
  const Matrix& tangent_basis() const { return tangent_basis_; }
  const Matrix& normal_basis() const { return normal_basis_; }
  const Matrix& projector() const { return projector_; }
  Matrix projector_perp() const;
  const Vector& singular_values() const { return sigma_; }

  Vector euclid_pseudoinverse(const Vector& w) const;  // Dc*ᴱ(Dc Dc*ᴱ)⁻¹ w
  Vector metric_apply(const Vector& v) const;          // G(x) v
  Vector metric_inverse_apply(const Vector& v) const;  // G(x)⁻¹ v
  double inner(const Vector& a, const Vector& b) const;
  Matrix gram() const;                                 // Dc Dc*ᵍ
  Matrix normal_operator(NormalOperatorChoice h) const;

  Vector tangent_step(const Vector& grad_f) const;
  Vector normal_step_gradient(const Vector& adjoint_of_c) const;  // argument Dc*ᴱ c
  Vector normal_step_pseudoinverse(NormalOperatorChoice h, const Vector& c) const;

 private:
  const ProblemInstance* prob_;
  Vector x_;
  bool euclidean_ = true;
  Matrix jacobian_;
  Vector sigma_;
  Matrix pinv_;
  Matrix tangent_basis_;
  Matrix normal_basis_;
  Matrix projector_;
  Matrix tangent_image_;  // Proj Z
  Matrix normal_image_;   // Proj^⊥ N
  Matrix g_tangent_;
  Matrix g_normal_;
  Eigen::LLT<Matrix> tangent_chol_;
  Eigen::LLT<Matrix> normal_chol_;
};

struct LandingDirection {
  Vector tangent;
  Vector normal;
  Vector full;
};

Matrix dc_matrix(const ProblemInstance& prob, const Vector& x);
Vector euclid_pseudoinverse_apply(const ProblemInstance& prob, const Vector& x, const Vector& w);
Vector tangent_step(const ProblemInstance& prob, const MetricSpec& metric, const Vector& x);
Vector normal_step_gradient(const ProblemInstance& prob, const MetricSpec& metric, const Vector& x);
Vector normal_step_pseudoinverse(const ProblemInstance& prob, const MetricSpec& metric, const Vector& x,
                                 NormalOperatorChoice h);
LandingDirection landing_direction(const ProblemInstance& prob, const MetricSpec& metric, const Vector& x,
                                   NormalOperatorChoice h);
Matrix gram_operator(const ProblemInstance& prob, const MetricSpec& metric, const Vector& x);

}  // namespace landing
