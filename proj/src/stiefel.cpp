#include "landing/stiefel.hpp"

#include "landing/linalg.hpp"

namespace landing::stiefel {

using linalg::skew;
using linalg::sym;

StiefelPoint::StiefelPoint(Matrix x) : x_(std::move(x)) {
  if (x_.cols() < 1 || x_.rows() < x_.cols())
    fail(ErrorKind::invalid_argument, "Stiefel point needs n >= p >= 1");
  linalg::svd(x_);
  gram_ = x_.transpose() * x_;
  chol_.compute(gram_);
  if (chol_.info() != Eigen::Success) fail(ErrorKind::rank_deficient, "XᵀX is not positive definite");
}

Matrix StiefelPoint::gram_solve(const Matrix& b) const { return chol_.solve(b); }

Matrix StiefelPoint::gram_inverse() const {
  return gram_solve(Matrix::Identity(cols(), cols()));
}

Matrix StiefelPoint::range_projection(const Matrix& z) const {
  return x_ * gram_solve(x_.transpose() * z);
}

double StiefelPoint::constraint_gap() const {
  return (gram_ - Matrix::Identity(cols(), cols())).norm();
}

ProjectedPair oblique_project(const StiefelPoint& pt, const Matrix& z) {
  const Matrix& x = pt.x();
  const Matrix xtz = x.transpose() * z;
  Matrix tangent = x * pt.gram_solve(skew(xtz)) + z - pt.range_projection(z);
  Matrix normal = x * pt.gram_solve(sym(xtz));
  return {std::move(tangent), std::move(normal)};
}

Matrix oblique_project_adjoint(const StiefelPoint& pt, const Matrix& z) {
  const Matrix& x = pt.x();
  return x * skew(pt.gram_solve(x.transpose() * z)) + z - pt.range_projection(z);
}

Matrix euclidean_tangent_step(const StiefelPoint& pt, const Matrix& grad_f) {
  const Matrix t = sym(pt.x().transpose() * grad_f);
  const Matrix s = linalg::sylvester_sym(pt.x(), t);
  return -grad_f + pt.x() * s;
}

Matrix euclidean_normal_step(const StiefelPoint& pt, NormalOperatorChoice h) {
  const Index p = pt.cols();
  if (pt.constraint_gap() <= kFeasibleFastPath) return Matrix::Zero(pt.rows(), p);
  const Matrix eye = Matrix::Identity(p, p);
  switch (h.kind) {
    case NormalOperatorKind::identity:
      return -0.5 * h.scale * pt.x() * (eye - pt.gram_inverse());
    case NormalOperatorKind::gram_g:  // Euclidean metric: Dc*ᵍ = Dc*ᴱ
    case NormalOperatorKind::gram_euclid:  // −∇ψ with ψ = ⅛‖XᵀX − I‖²
      return -0.5 * h.scale * pt.x() * (pt.gram() - eye);
  }
  return Matrix::Zero(pt.rows(), p);
}

Matrix euclidean_normal_step_sylvester(const StiefelPoint& pt, NormalOperatorChoice h) {
  const Index p = pt.cols();
  const Matrix& a = pt.gram();
  const Matrix c = 0.5 * (a - Matrix::Identity(p, p));
  Matrix hc = c;
  if (h.kind != NormalOperatorKind::identity) hc = sym(a * c);  // Dc Dc*[S] = sym(AS)
  const Matrix s = linalg::sylvester_sym(pt.x(), h.scale * hc);
  return -pt.x() * s;
}

StepPair canonical_steps(const StiefelPoint& pt, const Matrix& grad_f) {
  const Matrix& x = pt.x();
  const Index p = pt.cols();
  Matrix tangent = -x * pt.gram_solve(skew(pt.gram_solve(x.transpose() * grad_f))) - grad_f +
                   pt.range_projection(grad_f);
  Matrix normal = Matrix::Zero(pt.rows(), p);
  if (pt.constraint_gap() > kFeasibleFastPath)
    normal = -0.5 * x * (Matrix::Identity(p, p) - pt.gram_inverse());
  return {std::move(tangent), std::move(normal)};
}

namespace {

void require_beta(double beta) {
  if (!(beta > 0.0)) fail(ErrorKind::invalid_argument, "beta must be positive");
}

}  // namespace

StepPair beta_steps(const StiefelPoint& pt, const Matrix& grad_f, double beta) {
  require_beta(beta);
  const Matrix& x = pt.x();
  const Matrix& a = pt.gram();
  const Index p = pt.cols();
  Matrix tangent = -(1.0 / beta) * x * skew(pt.gram_solve(x.transpose() * grad_f)) * a -
                   (grad_f - pt.range_projection(grad_f)) * a;
  Matrix normal = Matrix::Zero(pt.rows(), p);
  if (pt.constraint_gap() > kFeasibleFastPath)
    normal = -(0.5 / beta) * x * (a - Matrix::Identity(p, p)) * a;
  return {std::move(tangent), std::move(normal)};
}

Matrix beta_tangent_step_expanded(const StiefelPoint& pt, const Matrix& grad_f, double beta) {
  require_beta(beta);
  const Matrix& x = pt.x();
  const Matrix& a = pt.gram();
  const double half_inv = 0.5 / beta;
  return -grad_f * a + half_inv * x * grad_f.transpose() * x +
         (1.0 - half_inv) * pt.range_projection(grad_f) * a;
}

double stiefel_metric_eval(const MetricKind& kind, const StiefelPoint& pt, const Matrix& xi,
                           const Matrix& zeta) {
  if (std::holds_alternative<EuclideanKind>(kind)) return (xi.array() * zeta.array()).sum();
  if (std::holds_alternative<CanonicalKind>(kind)) {
    const Matrix gz = canonical_tangent_restriction(pt, zeta);  // same full operator
    return (xi.array() * gz.array()).sum();
  }
  const double beta = std::get<BetaKind>(kind).beta;
  require_beta(beta);
  const Matrix gz = (zeta - (1.0 - beta) * pt.range_projection(zeta)) * pt.gram_inverse();
  return (xi.array() * gz.array()).sum();
}

Matrix canonical_tangent_restriction(const StiefelPoint& pt, const Matrix& z) {
  const Matrix& x = pt.x();
  return x * (x.transpose() * z) + z - pt.range_projection(z);
}

Matrix canonical_normal_restriction(const StiefelPoint& pt, const Matrix& z) {
  const Matrix& x = pt.x();
  return x * (x.transpose() * z);
}

Matrix beta_tangent_restriction(const StiefelPoint& pt, const Matrix& z, double beta) {
  require_beta(beta);
  const Matrix pz = pt.range_projection(z);
  return (z - pz + beta * pz) * pt.gram_inverse();
}

Matrix beta_normal_restriction(const StiefelPoint& pt, const Matrix& z, double beta) {
  require_beta(beta);
  return beta * pt.range_projection(z) * pt.gram_inverse();
}

}  // namespace landing::stiefel
