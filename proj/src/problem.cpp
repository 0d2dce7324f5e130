#include "landing/problem.hpp"

#include "landing/finite_difference.hpp"
#include "landing/rng.hpp"

#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace landing {

double infeasibility(const ProblemInstance& prob, const Vector& x) {
  return 0.5 * prob.c(x).squaredNorm();
}

Vector hess_lagrangian_apply(const ProblemInstance& prob, const Vector& x, const Vector& lambda,
                             const Vector& xi) {
  if (prob.hess_lagrangian) return prob.hess_lagrangian(x, lambda, xi);
  const double norm = xi.norm();
  if (norm == 0.0) return Vector::Zero(x.size());
  const double h = std::sqrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, x.norm());
  const Vector dir = xi / norm;
  auto grad_lagrangian = [&](const Vector& y) -> Vector {
    return prob.grad_f(y) - prob.dc_adjoint(y, lambda);
  };
  return (grad_lagrangian(x + h * dir) - grad_lagrangian(x - h * dir)) * (norm / (2.0 * h));
}

Matrix hess_lagrangian_matrix(const ProblemInstance& prob, const Vector& x, const Vector& lambda) {
  Matrix h(prob.dim_e, prob.dim_e);
  Vector e = Vector::Zero(prob.dim_e);
  for (Index j = 0; j < prob.dim_e; ++j) {
    e(j) = 1.0;
    h.col(j) = hess_lagrangian_apply(prob, x, lambda, e);
    e(j) = 0.0;
  }
  return 0.5 * (h + h.transpose());
}

Index sym_dim(Index p) { return p * (p + 1) / 2; }

Vector sym_to_coefficients(const Matrix& s) {
  const Index p = s.rows();
  Vector y(sym_dim(p));
  Index k = 0;
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i <= j; ++i) {
      y(k++) = (i == j) ? s(i, i) : std::numbers::sqrt2 * 0.5 * (s(i, j) + s(j, i));
    }
  }
  return y;
}

Matrix coefficients_to_sym(const Vector& y, Index p) {
  Matrix s(p, p);
  Index k = 0;
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i <= j; ++i) {
      if (i == j) {
        s(i, i) = y(k++);
      } else {
        s(i, j) = s(j, i) = y(k++) / std::numbers::sqrt2;
      }
    }
  }
  return s;
}

Matrix as_matrix(const Vector& x, MatrixShape shape) {
  return Eigen::Map<const Matrix>(x.data(), shape.rows, shape.cols);
}

Vector as_vector(const Matrix& x) { return Eigen::Map<const Vector>(x.data(), x.size()); }

ProblemInstance make_sphere_problem(Index n, const Vector& linear_cost, const Vector& quadratic_diag) {
  if (n < 2) fail(ErrorKind::invalid_argument, "sphere problem needs n >= 2");
  if (linear_cost.size() != n) fail(ErrorKind::invalid_argument, "linear_cost must have length n");
  if (quadratic_diag.size() != 0 && quadratic_diag.size() != n)
    fail(ErrorKind::invalid_argument, "quadratic_diag must be empty or have length n");
  const Vector a = linear_cost;
  const Vector q = quadratic_diag.size() == 0 ? Vector::Zero(n) : quadratic_diag;

  ProblemInstance prob;
  prob.name = "sphere";
  prob.dim_e = n;
  prob.dim_f = 1;
  prob.f = [a, q](const Vector& x) { return a.dot(x) + 0.5 * x.dot(q.cwiseProduct(x)); };
  prob.grad_f = [a, q](const Vector& x) -> Vector { return a + q.cwiseProduct(x); };
  prob.c = [](const Vector& x) -> Vector {
    Vector out(1);
    out(0) = 0.5 * (x.squaredNorm() - 1.0);
    return out;
  };
  prob.dc = [](const Vector& x, const Vector& xi) -> Vector {
    Vector out(1);
    out(0) = x.dot(xi);
    return out;
  };
  prob.dc_adjoint = [](const Vector& x, const Vector& y) -> Vector { return y(0) * x; };
  prob.hess_lagrangian = [q](const Vector&, const Vector& lambda, const Vector& xi) -> Vector {
    return q.cwiseProduct(xi) - lambda(0) * xi;
  };
  return prob;
}

Matrix brockett_cost_matrix(Index n, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0xb0c));
  return rng.random_symmetric(n) / std::sqrt(static_cast<double>(n));
}

namespace {

ProblemInstance stiefel_base(Index n, Index p) {
  const MatrixShape shape{n, p};
  ProblemInstance prob;
  prob.dim_e = n * p;
  prob.dim_f = sym_dim(p);
  prob.shape = shape;
  prob.c = [shape](const Vector& xv) -> Vector {
    const Matrix x = as_matrix(xv, shape);
    const Matrix gram = x.transpose() * x;
    return sym_to_coefficients(0.5 * (gram - Matrix::Identity(shape.cols, shape.cols)));
  };
  prob.dc = [shape](const Vector& xv, const Vector& xiv) -> Vector {
    const Matrix m = as_matrix(xv, shape).transpose() * as_matrix(xiv, shape);
    return sym_to_coefficients(0.5 * (m + m.transpose()));
  };
  prob.dc_adjoint = [shape](const Vector& xv, const Vector& y) -> Vector {
    return as_vector(as_matrix(xv, shape) * coefficients_to_sym(y, shape.cols));
  };
  return prob;
}

}  // namespace

ProblemInstance make_stiefel_problem(StiefelCost kind, Index n, Index p, std::uint64_t seed) {
  if (p < 1 || p > n) fail(ErrorKind::invalid_argument, "stiefel problem needs 1 <= p <= n");
  ProblemInstance prob = stiefel_base(n, p);
  const MatrixShape shape{n, p};
  if (kind == StiefelCost::brockett) {
    const Matrix a = brockett_cost_matrix(n, seed);
    Vector weights(p);
    for (Index i = 0; i < p; ++i) weights(i) = static_cast<double>(p - i);
    const Matrix w = weights.asDiagonal();
    prob.name = "brockett";
    prob.f = [a, w, shape](const Vector& xv) {
      const Matrix x = as_matrix(xv, shape);
      return 0.5 * (x.transpose() * a * x * w).trace();
    };
    prob.grad_f = [a, w, shape](const Vector& xv) -> Vector {
      return as_vector(a * as_matrix(xv, shape) * w);
    };
    prob.hess_lagrangian = [a, w, shape](const Vector&, const Vector& lambda, const Vector& xiv) -> Vector {
      const Matrix xi = as_matrix(xiv, shape);
      return as_vector(a * xi * w - xi * coefficients_to_sym(lambda, shape.cols));
    };
  } else {
    Rng rng(mix_seed(seed, 0x9c0));
    const Matrix a = rng.normal_matrix(n, n) / std::sqrt(static_cast<double>(n));
    const Matrix b = rng.normal_matrix(n, p);
    const Matrix ata = a.transpose() * a;
    prob.name = "procrustes";
    prob.f = [a, b, shape](const Vector& xv) {
      return 0.5 * (a * as_matrix(xv, shape) - b).squaredNorm();
    };
    prob.grad_f = [a, b, shape](const Vector& xv) -> Vector {
      return as_vector(a.transpose() * (a * as_matrix(xv, shape) - b));
    };
    prob.hess_lagrangian = [ata, shape](const Vector&, const Vector& lambda, const Vector& xiv) -> Vector {
      const Matrix xi = as_matrix(xiv, shape);
      return as_vector(ata * xi - xi * coefficients_to_sym(lambda, shape.cols));
    };
  }
  return prob;
}

ProblemInstance make_random_quadratic_problem(Index n, Index m, std::uint64_t seed) {
  if (m < 1 || m >= n) fail(ErrorKind::invalid_argument, "random quadratic problem needs 1 <= m < n");
  Rng rng(mix_seed(seed, 0x9a));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const Matrix q = rng.random_symmetric(n) * scale;
  const Vector qlin = rng.normal_vector(n);
  std::vector<Matrix> a(static_cast<std::size_t>(m));
  Matrix b(n, m);
  Vector r(m);
  for (Index i = 0; i < m; ++i) {
    a[static_cast<std::size_t>(i)] = rng.random_symmetric(n) * (0.5 * scale);
    b.col(i) = rng.normal_vector(n);
    r(i) = rng.normal();
  }

  ProblemInstance prob;
  prob.name = "random_quadratic";
  prob.dim_e = n;
  prob.dim_f = m;
  prob.f = [q, qlin](const Vector& x) { return 0.5 * x.dot(q * x) + qlin.dot(x); };
  prob.grad_f = [q, qlin](const Vector& x) -> Vector { return q * x + qlin; };
  prob.c = [a, b, r](const Vector& x) -> Vector {
    Vector out(r.size());
    for (Index i = 0; i < r.size(); ++i)
      out(i) = 0.5 * x.dot(a[static_cast<std::size_t>(i)] * x) + b.col(i).dot(x) - r(i);
    return out;
  };
  auto jacobian = [a, b](const Vector& x) -> Matrix {
    Matrix j(b.cols(), x.size());
    for (Index i = 0; i < b.cols(); ++i)
      j.row(i) = (a[static_cast<std::size_t>(i)] * x + b.col(i)).transpose();
    return j;
  };
  prob.dc = [jacobian](const Vector& x, const Vector& xi) -> Vector { return jacobian(x) * xi; };
  prob.dc_adjoint = [jacobian](const Vector& x, const Vector& y) -> Vector {
    return jacobian(x).transpose() * y;
  };
  prob.hess_lagrangian = [q, a](const Vector&, const Vector& lambda, const Vector& xi) -> Vector {
    Vector out = q * xi;
    for (Index i = 0; i < lambda.size(); ++i) out -= lambda(i) * (a[static_cast<std::size_t>(i)] * xi);
    return out;
  };
  return prob;
}

Vector stiefel_start_point(Index n, Index p, std::uint64_t seed, double perturbation) {
  Rng rng(mix_seed(seed, 0x5e));
  const Matrix g = rng.normal_matrix(n, p);
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix frame = qr.householderQ() * Matrix::Identity(n, p);
  return as_vector(frame + perturbation * rng.normal_matrix(n, p));
}

namespace {

double relative_gap(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

[[noreturn]] void validation_failure(const std::string& prob, const char* identity, Index point,
                                     double error, double tol) {
  std::ostringstream msg;
  msg << prob << ": " << identity << " check failed at trial point " << point << " (error " << error
      << " > " << tol << ")";
  fail(ErrorKind::validation_failed, msg.str());
}

}  // namespace

ValidationReport validate_problem(const ProblemInstance& prob, std::span<const Vector> trial_points,
                                  std::uint64_t probe_seed) {
  if (trial_points.empty()) fail(ErrorKind::invalid_argument, "validate_problem needs a trial point");
  ValidationReport report;
  Rng rng(mix_seed(probe_seed, 0x7a1));
  const auto psi = [&prob](const Vector& y) { return infeasibility(prob, y); };
  for (std::size_t idx = 0; idx < trial_points.size(); ++idx) {
    const Vector& x = trial_points[idx];
    const auto point = static_cast<Index>(idx);
    const double h = default_fd_step(x);

    const double grad_err = relative_gap(fd_gradient(prob.f, x, h), prob.grad_f(x));
    report.max_gradient_error = std::max(report.max_gradient_error, grad_err);
    if (grad_err > kGradientFdTolerance)
      validation_failure(prob.name, "gradient", point, grad_err, kGradientFdTolerance);

    const Vector c = prob.c(x);
    const double psi_err = relative_gap(fd_gradient(psi, x, h), prob.dc_adjoint(x, c));
    report.max_infeasibility_gradient_error = std::max(report.max_infeasibility_gradient_error, psi_err);
    if (psi_err > kGradientFdTolerance)
      validation_failure(prob.name, "infeasibility gradient", point, psi_err, kGradientFdTolerance);

    for (int probe = 0; probe < 3; ++probe) {
      const Vector xi = rng.normal_vector(prob.dim_e);
      const Vector zeta = rng.normal_vector(prob.dim_e);
      const Vector y = rng.normal_vector(prob.dim_f);
      const double a = rng.normal();
      const double b = rng.normal();

      const Vector dxi = prob.dc(x, xi);
      const double lhs = dxi.dot(y);
      const double rhs = xi.dot(prob.dc_adjoint(x, y));
      const double adj_err = std::abs(lhs - rhs) / std::max(1.0, dxi.norm() * y.norm());
      report.max_adjoint_error = std::max(report.max_adjoint_error, adj_err);
      if (adj_err > kAdjointTolerance)
        validation_failure(prob.name, "adjoint identity", point, adj_err, kAdjointTolerance);

      const Vector combined = prob.dc(x, a * xi + b * zeta);
      const Vector separate = a * dxi + b * prob.dc(x, zeta);
      const double lin_err = (combined - separate).norm() / std::max(1.0, separate.norm());
      report.max_linearity_error = std::max(report.max_linearity_error, lin_err);
      if (lin_err > kLinearityTolerance)
        validation_failure(prob.name, "linearity", point, lin_err, kLinearityTolerance);
    }
    ++report.points;
  }
  return report;
}

}  // namespace landing
