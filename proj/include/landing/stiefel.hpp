#pragma once

#include "landing/errors.hpp"
#include "landing/normal_operator.hpp"

#include <variant>

namespace landing::stiefel {

/// Point of R^{n×p}_* with cached Gram matrix A = XᵀX and its Cholesky factor.
class StiefelPoint {
 public:
  explicit StiefelPoint(Matrix x);

  const Matrix& x() const { return x_; }
  const Matrix& gram() const { return gram_; }
  Index rows() const { return x_.rows(); }
  Index cols() const { return x_.cols(); }

  Matrix gram_solve(const Matrix& b) const;            // A⁻¹ B
  Matrix gram_inverse() const;                         // A⁻¹
  Matrix range_projection(const Matrix& z) const;      // Π Z with Π = X A⁻¹ Xᵀ
  double constraint_gap() const;                       // ‖XᵀX − I‖

 private:
  Matrix x_;
  Matrix gram_;
  Eigen::LLT<Matrix> chol_;
};

struct EuclideanKind {};
struct CanonicalKind {};
struct BetaKind {
  double beta = 1.0;
};
using MetricKind = std::variant<EuclideanKind, CanonicalKind, BetaKind>;

struct ProjectedPair {
  Matrix tangent;
  Matrix normal;
};

struct StepPair {
  Matrix tangent;
  Matrix normal;
};

inline constexpr double kFeasibleFastPath = 1e-14;

ProjectedPair oblique_project(const StiefelPoint& pt, const Matrix& z);
// Adjoint projector Proj* Z = X skew(A⁻¹XᵀZ) + (I − Π)Z.
Matrix oblique_project_adjoint(const StiefelPoint& pt, const Matrix& z);

Matrix euclidean_tangent_step(const StiefelPoint& pt, const Matrix& grad_f);
Matrix euclidean_normal_step(const StiefelPoint& pt, NormalOperatorChoice h);
// Generic Euclidean normal step: −X S with ½(AS + SA) = ½H[A − I].
Matrix euclidean_normal_step_sylvester(const StiefelPoint& pt, NormalOperatorChoice h);

StepPair canonical_steps(const StiefelPoint& pt, const Matrix& grad_f);
StepPair beta_steps(const StiefelPoint& pt, const Matrix& grad_f, double beta);
// d_T of the β-metric in the expanded (projector-free) algebraic form.
Matrix beta_tangent_step_expanded(const StiefelPoint& pt, const Matrix& grad_f, double beta);

double stiefel_metric_eval(const MetricKind& kind, const StiefelPoint& pt, const Matrix& xi,
                           const Matrix& zeta);

// Tangent and normal restrictions G_T, G_N defining each metric from the oblique projector.
Matrix canonical_tangent_restriction(const StiefelPoint& pt, const Matrix& z);  // XXᵀZ + (I − Π)Z
Matrix canonical_normal_restriction(const StiefelPoint& pt, const Matrix& z);   // XXᵀZ
Matrix beta_tangent_restriction(const StiefelPoint& pt, const Matrix& z, double beta);
Matrix beta_normal_restriction(const StiefelPoint& pt, const Matrix& z, double beta);

}  // namespace landing::stiefel
