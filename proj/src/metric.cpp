#include "landing/metric.hpp"

#include "landing/linalg.hpp"
#include "landing/stiefel.hpp"

#include <sstream>

namespace landing {

namespace {

constexpr double kProjectorTolerance = 1e-8;

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

bool factor_pd(const Matrix& k, Eigen::LLT<Matrix>& chol) {
  chol.compute(k);
  if (chol.info() != Eigen::Success) return false;
  const Vector pivots = chol.matrixLLT().diagonal().array().square();
  return pivots.minCoeff() > 1e-14 * pivots.maxCoeff();
}

ConstructedMetric resolve(const MetricSpec& metric, const ProblemInstance& prob) {
  if (const auto* m = std::get_if<ConstructedMetric>(&metric)) return *m;
  if (!prob.shape) fail(ErrorKind::invalid_argument, "Stiefel metric requires a matrix-shaped problem");
  if (std::holds_alternative<StiefelCanonicalMetric>(metric)) return stiefel_canonical_construction(*prob.shape);
  return stiefel_beta_construction(*prob.shape, std::get<StiefelBetaMetric>(metric).beta);
}

template <class Op>
OperatorField stiefel_operator(MatrixShape shape, Op op) {
  return [shape, op](const Vector& xv) -> Matrix {
    const stiefel::StiefelPoint pt(as_matrix(xv, shape));
    return symmetrized(linalg::materialize(shape.rows * shape.cols, [&](const Vector& e) -> Vector {
      return as_vector(op(pt, as_matrix(e, shape)));
    }));
  };
}

}  // namespace

ObliqueProjectorField orthogonal_projector_field() {
  return {[](const Vector&, const Matrix& dc) -> Matrix {
    const linalg::RowSpaceSplit split = linalg::split_row_space(dc);
    return split.null_basis * split.null_basis.transpose();
  }};
}

ObliqueProjectorField projector_from_normal_space(
    std::function<Matrix(const Vector& x, const Matrix& dc)> normal_basis) {
  return {[normal_basis](const Vector& x, const Matrix& dc) -> Matrix {
    const Matrix nb = normal_basis(x, dc);
    const Matrix coupling = dc * nb;
    Eigen::FullPivLU<Matrix> lu(coupling);
    if (!lu.isInvertible()) fail(ErrorKind::invalid_projector, "normal space is not transversal to ker Dc");
    return Matrix::Identity(dc.cols(), dc.cols()) - nb * lu.solve(dc);
  }};
}

ObliqueProjectorField stiefel_projector_field(MatrixShape shape) {
  return {[shape](const Vector& xv, const Matrix&) -> Matrix {
    const stiefel::StiefelPoint pt(as_matrix(xv, shape));
    return linalg::materialize(shape.rows * shape.cols, [&](const Vector& e) -> Vector {
      return as_vector(stiefel::oblique_project(pt, as_matrix(e, shape)).tangent);
    });
  }};
}

OperatorField identity_operator_field(Index dim) {
  return [dim](const Vector&) -> Matrix { return Matrix::Identity(dim, dim); };
}

OperatorField constant_operator_field(Matrix op) {
  return [op = std::move(op)](const Vector&) -> Matrix { return op; };
}

ConstructedMetric stiefel_canonical_construction(MatrixShape shape) {
  return {stiefel_projector_field(shape),
          stiefel_operator(shape, [](const stiefel::StiefelPoint& pt, const Matrix& z) {
            return stiefel::canonical_tangent_restriction(pt, z);
          }),
          stiefel_operator(shape, [](const stiefel::StiefelPoint& pt, const Matrix& z) {
            return stiefel::canonical_normal_restriction(pt, z);
          })};
}

ConstructedMetric stiefel_beta_construction(MatrixShape shape, double beta) {
  if (!(beta > 0.0)) fail(ErrorKind::invalid_argument, "beta must be positive");
  return {stiefel_projector_field(shape),
          stiefel_operator(shape, [beta](const stiefel::StiefelPoint& pt, const Matrix& z) {
            return stiefel::beta_tangent_restriction(pt, z, beta);
          }),
          stiefel_operator(shape, [beta](const stiefel::StiefelPoint& pt, const Matrix& z) {
            return stiefel::beta_normal_restriction(pt, z, beta);
          })};
}

PointGeometry::PointGeometry(const ProblemInstance& prob, const MetricSpec& metric, const Vector& x)
    : prob_(&prob), x_(x) {
  if (!x.allFinite()) fail(ErrorKind::invalid_argument, "point has non-finite entries");
  jacobian_ = dc_matrix(prob, x);
  const linalg::RowSpaceSplit split = linalg::split_row_space(jacobian_);
  sigma_ = split.sigma.head(prob.dim_f);
  pinv_ = split.row_basis * sigma_.cwiseInverse().asDiagonal() * split.u.transpose();
  tangent_basis_ = split.null_basis;
  const Index n = prob.dim_e;

  euclidean_ = std::holds_alternative<EuclideanMetric>(metric);
  if (euclidean_) {
    projector_ = Matrix::Identity(n, n) - split.row_basis * split.row_basis.transpose();
    normal_basis_ = split.row_basis;
    return;
  }

  const ConstructedMetric built = resolve(metric, prob);
  projector_ = built.projector.matrix(x, jacobian_);
  if (projector_.rows() != n || projector_.cols() != n)
    fail(ErrorKind::invalid_projector, "projector has wrong dimensions");
  const double pscale = std::max(1.0, projector_.norm());
  const double range_gap = (jacobian_ * projector_).norm() / std::max(1.0, jacobian_.norm()) / pscale;
  const double idem_gap = (projector_ * projector_ - projector_).norm() / pscale;
  if (range_gap > kProjectorTolerance || idem_gap > kProjectorTolerance) {
    std::ostringstream msg;
    msg << "projector laws violated (range " << range_gap << ", idempotence " << idem_gap << ")";
    fail(ErrorKind::invalid_projector, msg.str());
  }
  const Matrix perp = projector_perp();
  normal_basis_ = perp * split.row_basis;

  g_tangent_ = symmetrized(built.tangent_restriction(x));
  g_normal_ = symmetrized(built.normal_restriction(x));
  tangent_image_ = projector_ * tangent_basis_;
  const Matrix& tz = tangent_image_;
  if (!factor_pd(tz.transpose() * g_tangent_ * tz, tangent_chol_))
    fail(ErrorKind::metric_not_pd, "tangent restriction is not positive definite on the tangent space");
  normal_image_ = perp * normal_basis_;
  const Matrix& nn = normal_image_;
  if (!factor_pd(nn.transpose() * g_normal_ * nn, normal_chol_))
    fail(ErrorKind::metric_not_pd, "normal restriction is not positive definite on the normal space");
}

Matrix PointGeometry::projector_perp() const {
  return Matrix::Identity(projector_.rows(), projector_.cols()) - projector_;
}

Vector PointGeometry::euclid_pseudoinverse(const Vector& w) const { return pinv_ * w; }

Vector PointGeometry::metric_apply(const Vector& v) const {
  if (euclidean_) return v;
  const Vector pv = projector_ * v;
  const Vector qv = v - pv;
  const Vector gq = g_normal_ * qv;
  return projector_.transpose() * (g_tangent_ * pv) + gq - projector_.transpose() * gq;
}

Vector PointGeometry::metric_inverse_apply(const Vector& v) const {
  if (euclidean_) return v;
  const Matrix& tz = tangent_image_;
  const Matrix& nn = normal_image_;
  const Vector t = tz * tangent_chol_.solve(tz.transpose() * v);
  const Vector n = nn * normal_chol_.solve(nn.transpose() * v);
  return t + n;
}

double PointGeometry::inner(const Vector& a, const Vector& b) const { return a.dot(metric_apply(b)); }

Matrix PointGeometry::gram() const {
  if (euclidean_) return symmetrized(jacobian_ * jacobian_.transpose());
  Matrix ginv_jt(jacobian_.cols(), jacobian_.rows());
  for (Index i = 0; i < jacobian_.rows(); ++i)
    ginv_jt.col(i) = metric_inverse_apply(jacobian_.row(i).transpose());
  return symmetrized(jacobian_ * ginv_jt);
}

Matrix PointGeometry::normal_operator(NormalOperatorChoice h) const {
  const Index m = jacobian_.rows();
  switch (h.kind) {
    case NormalOperatorKind::identity: return h.scale * Matrix::Identity(m, m);
    case NormalOperatorKind::gram_g: return h.scale * gram();
    case NormalOperatorKind::gram_euclid: return h.scale * symmetrized(jacobian_ * jacobian_.transpose());
  }
  return Matrix::Identity(m, m);
}

Vector PointGeometry::tangent_step(const Vector& grad_f) const {
  if (euclidean_) return -tangent_basis_ * (tangent_basis_.transpose() * grad_f);
  return -tangent_basis_ * tangent_chol_.solve(tangent_image_.transpose() * grad_f);
}

Vector PointGeometry::normal_step_gradient(const Vector& adjoint_of_c) const {
  return -metric_inverse_apply(adjoint_of_c);
}

Vector PointGeometry::normal_step_pseudoinverse(NormalOperatorChoice h, const Vector& c) const {
  const Vector hc = normal_operator(h) * c;
  const Vector step = pinv_ * hc;
  if (euclidean_) return -step;
  return -(step - projector_ * step);
}

Matrix dc_matrix(const ProblemInstance& prob, const Vector& x) {
  return linalg::materialize(prob.dim_e, [&](const Vector& e) -> Vector { return prob.dc(x, e); });
}

Vector euclid_pseudoinverse_apply(const ProblemInstance& prob, const Vector& x, const Vector& w) {
  return PointGeometry(prob, EuclideanMetric{}, x).euclid_pseudoinverse(w);
}

Vector tangent_step(const ProblemInstance& prob, const MetricSpec& metric, const Vector& x) {
  return PointGeometry(prob, metric, x).tangent_step(prob.grad_f(x));
}

Vector normal_step_gradient(const ProblemInstance& prob, const MetricSpec& metric, const Vector& x) {
  const Vector adj = prob.dc_adjoint(x, prob.c(x));
  if (std::holds_alternative<EuclideanMetric>(metric)) return -adj;
  return PointGeometry(prob, metric, x).normal_step_gradient(adj);
}

Vector normal_step_pseudoinverse(const ProblemInstance& prob, const MetricSpec& metric, const Vector& x,
                                 NormalOperatorChoice h) {
  return PointGeometry(prob, metric, x).normal_step_pseudoinverse(h, prob.c(x));
}

LandingDirection landing_direction(const ProblemInstance& prob, const MetricSpec& metric, const Vector& x,
                                   NormalOperatorChoice h) {
  const PointGeometry geo(prob, metric, x);
  LandingDirection d;
  d.tangent = geo.tangent_step(prob.grad_f(x));
  d.normal = geo.normal_step_pseudoinverse(h, prob.c(x));
  d.full = d.tangent + d.normal;
  return d;
}

Matrix gram_operator(const ProblemInstance& prob, const MetricSpec& metric, const Vector& x) {
  return PointGeometry(prob, metric, x).gram();
}

}  // namespace landing
