#pragma once

#include "landing/errors.hpp"

namespace landing::linalg {

inline constexpr double kRankTolerance = 1e-10;

/// Thin SVD X = U diag(sigma) Vᵀ, sigma nonincreasing.
struct SvdFactors {
  Matrix u;
  Vector sigma;
  Matrix v;
};

// Throws rank_deficient unless X has full column rank.
SvdFactors svd(const Matrix& x, double rank_tolerance = kRankTolerance);

/// Split of a full-row-rank m×n matrix A = U diag(sigma) row_basisᵀ.
/// null_basis is an orthonormal basis of ker A.
struct RowSpaceSplit {
  Matrix u;
  Vector sigma;
  Matrix row_basis;
  Matrix null_basis;
};

RowSpaceSplit split_row_space(const Matrix& a, double rank_tolerance = kRankTolerance);

// Solves A X = B for symmetric positive definite A by Cholesky.
Matrix solve_spd(const Matrix& a, const Matrix& b);

// Symmetric S with ½(XᵀX S + S XᵀX) = T, computed in the right singular basis of X.
Matrix sylvester_sym(const Matrix& x, const Matrix& t, double rank_tolerance = kRankTolerance);

Matrix sym(const Matrix& a);
Matrix skew(const Matrix& a);

// Orthonormal basis of range(basis)^⊥ (basis assumed full column rank).
Matrix orthogonal_complement(const Matrix& basis);

// Materializes a linear map given by its action on the standard basis of R^n.
template <class Apply>
Matrix materialize(Index n, Apply&& apply) {
  Matrix out;
  Vector e = Vector::Zero(n);
  for (Index j = 0; j < n; ++j) {
    e(j) = 1.0;
    const Vector col = apply(e);
    if (j == 0) out.resize(col.size(), n);
    out.col(j) = col;
    e(j) = 0.0;
  }
  return out;
}

}  // namespace landing::linalg
