#include "landing/linalg.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace landing::linalg {

namespace {

void require_finite(const Matrix& a, const char* what) {
  if (!a.allFinite()) fail(ErrorKind::invalid_argument, std::string(what) + " has non-finite entries");
}

}  // namespace

SvdFactors svd(const Matrix& x, double rank_tolerance) {
  require_finite(x, "svd input");
  if (x.rows() < x.cols() || x.cols() == 0)
    fail(ErrorKind::rank_deficient, "matrix cannot have full column rank");
  Eigen::JacobiSVD<Matrix> dec(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = dec.singularValues();
  if (s(s.size() - 1) <= rank_tolerance * s(0)) {
    std::ostringstream msg;
    msg << "sigma_min/sigma_max = " << s(s.size() - 1) / s(0) << " <= " << rank_tolerance;
    fail(ErrorKind::rank_deficient, msg.str());
  }
  return {dec.matrixU(), s, dec.matrixV()};
}

RowSpaceSplit split_row_space(const Matrix& a, double rank_tolerance) {
  require_finite(a, "constraint differential");
  const Index m = a.rows();
  const Index n = a.cols();
  if (m >= n) fail(ErrorKind::invalid_argument, "need fewer constraints than variables");
  Eigen::JacobiSVD<Matrix> dec(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = dec.singularValues();
  if (m > 0 && s(m - 1) <= rank_tolerance * s(0)) {
    std::ostringstream msg;
    msg << "LICQ violated: sigma_min/sigma_max = " << s(m - 1) / s(0);
    fail(ErrorKind::rank_deficient, msg.str());
  }
  const Matrix& v = dec.matrixV();
  return {dec.matrixU(), s, v.leftCols(m), v.rightCols(n - m)};
}

Matrix solve_spd(const Matrix& a, const Matrix& b) {
  require_finite(a, "solve_spd matrix");
  if (a.rows() != a.cols() || a.rows() != b.rows())
    fail(ErrorKind::invalid_argument, "solve_spd dimension mismatch");
  const double scale = std::max(1.0, a.norm());
  if ((a - a.transpose()).norm() > 1e-12 * scale)
    fail(ErrorKind::invalid_argument, "solve_spd matrix is not symmetric");
  Eigen::LLT<Matrix> chol(a);
  if (chol.info() != Eigen::Success) fail(ErrorKind::not_positive_definite, "Cholesky pivot <= 0");
  const Vector pivots = chol.matrixLLT().diagonal().array().square();
  if (pivots.minCoeff() <= 1e-15 * pivots.maxCoeff())
    fail(ErrorKind::not_positive_definite, "Cholesky pivot below tolerance");
  return chol.solve(b);
}

Matrix sylvester_sym(const Matrix& x, const Matrix& t, double rank_tolerance) {
  if (t.rows() != x.cols() || t.cols() != x.cols())
    fail(ErrorKind::invalid_argument, "sylvester_sym: T must be p×p");
  if ((t - t.transpose()).norm() > 1e-12 * std::max(1.0, t.norm()))
    fail(ErrorKind::invalid_argument, "sylvester_sym: T must be symmetric");
  const SvdFactors f = svd(x, rank_tolerance);
  const Vector s2 = f.sigma.array().square();
  Matrix hat = f.v.transpose() * t * f.v;
  for (Index j = 0; j < hat.cols(); ++j)
    for (Index i = 0; i < hat.rows(); ++i) hat(i, j) *= 2.0 / (s2(i) + s2(j));
  const Matrix s = f.v * hat * f.v.transpose();
  return sym(s);
}

Matrix sym(const Matrix& a) { return 0.5 * (a + a.transpose()); }
Matrix skew(const Matrix& a) { return 0.5 * (a - a.transpose()); }

Matrix orthogonal_complement(const Matrix& basis) {
  const Index n = basis.rows();
  const Index k = basis.cols();
  Eigen::JacobiSVD<Matrix> dec(basis, Eigen::ComputeFullU);
  return dec.matrixU().rightCols(n - k);
}

}  // namespace landing::linalg
