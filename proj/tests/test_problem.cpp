#include "landing/finite_difference.hpp"
#include "landing/problem.hpp"
#include "landing/rng.hpp"

#include "test_support.hpp"

#include <vector>

using namespace landing;
using namespace landing::testing;

namespace {

std::vector<Vector> random_points(Index dim, std::uint64_t seed, int count, double scale = 1.0) {
  Rng rng(seed);
  std::vector<Vector> pts;
  for (int i = 0; i < count; ++i) pts.push_back(scale * rng.normal_vector(dim));
  return pts;
}

std::vector<ProblemInstance> builtins() {
  return {make_sphere_problem(3, vec({1.0, -0.5, 0.25})),
          make_sphere_problem(2, vec({0.0, 0.0}), vec({1.0, 3.0})),
          make_stiefel_problem(StiefelCost::brockett, 6, 2, 1),
          make_stiefel_problem(StiefelCost::procrustes, 5, 3, 2),
          make_random_quadratic_problem(9, 4, 3)};
}

}  // namespace

TEST(Sphere, HandEvaluation) {
  const auto prob = make_sphere_problem(2, vec({1.0, 0.0}));
  const Vector x = vec({2.0, 0.0});
  EXPECT_DOUBLE_EQ(prob.c(x)(0), 1.5);
  EXPECT_EQ(prob.grad_f(x), vec({1.0, 0.0}));
  EXPECT_DOUBLE_EQ(prob.f(x), 2.0);
  EXPECT_NEAR(prob.c(vec({0.6, 0.8}))(0), 0.0, 1e-16);
}

TEST(Sphere, AdjointProbes) {
  const auto prob = make_sphere_problem(4, vec({1.0, 2.0, 3.0, 4.0}));
  Rng rng(9);
  for (int i = 0; i < 20; ++i) {
    const Vector x = rng.normal_vector(4);
    const Vector xi = rng.normal_vector(4);
    const Vector y = rng.normal_vector(1);
    EXPECT_NEAR(prob.dc(x, xi).dot(y), xi.dot(prob.dc_adjoint(x, y)), 1e-12);
  }
}

TEST(Sphere, RejectsBadDimensions) {
  EXPECT_ERROR_KIND(make_sphere_problem(1, vec({1.0})), ErrorKind::invalid_argument);
  EXPECT_ERROR_KIND(make_sphere_problem(3, vec({1.0, 0.0})), ErrorKind::invalid_argument);
}

TEST(Stiefel, ScalarCaseConstraint) {
  const auto prob = make_stiefel_problem(StiefelCost::brockett, 1, 1, 0);
  EXPECT_DOUBLE_EQ(prob.c(vec({2.0}))(0), 1.5);
}

TEST(Stiefel, OrthonormalFrameIsFeasible) {
  for (auto kind : {StiefelCost::brockett, StiefelCost::procrustes}) {
    const auto prob = make_stiefel_problem(kind, 6, 3, 4);
    const Vector x = stiefel_start_point(6, 3, 11, 0.0);
    EXPECT_LE(prob.c(x).norm(), 1e-14);
  }
}

TEST(Stiefel, AdjointIsXS) {
  const auto prob = make_stiefel_problem(StiefelCost::brockett, 5, 3, 0);
  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    const Vector x = rng.normal_vector(15);
    const Vector xi = rng.normal_vector(15);
    const Vector y = rng.normal_vector(6);
    EXPECT_NEAR(prob.dc(x, xi).dot(y), xi.dot(prob.dc_adjoint(x, y)), 1e-12);
    const Matrix xs = as_matrix(x, {5, 3}) * coefficients_to_sym(y, 3);
    EXPECT_LE((as_vector(xs) - prob.dc_adjoint(x, y)).norm(), 1e-14);
  }
}

TEST(Stiefel, BrockettObjectiveMatchesDefinition) {
  const auto prob = make_stiefel_problem(StiefelCost::brockett, 4, 2, 5);
  const Matrix a = brockett_cost_matrix(4, 5);
  EXPECT_LE((a - a.transpose()).norm(), 0.0);
  const Vector x = stiefel_start_point(4, 2, 1, 0.2);
  const Matrix xm = as_matrix(x, {4, 2});
  Matrix n = Matrix::Zero(2, 2);
  n(0, 0) = 2.0;
  n(1, 1) = 1.0;
  EXPECT_NEAR(prob.f(x), 0.5 * (xm.transpose() * a * xm * n).trace(), 1e-13);
}

TEST(SymEmbedding, IsIsometricAndInvertible) {
  Rng rng(2);
  for (Index p = 1; p <= 5; ++p) {
    const Matrix s = rng.random_symmetric(p);
    const Vector y = sym_to_coefficients(s);
    EXPECT_EQ(y.size(), sym_dim(p));
    EXPECT_NEAR(y.norm(), s.norm(), 1e-12);
    EXPECT_LE((coefficients_to_sym(y, p) - s).norm(), 1e-15);
  }
  const auto prob = make_stiefel_problem(StiefelCost::procrustes, 5, 3, 1);
  const Vector x = rng.normal_vector(15);
  const Matrix xm = as_matrix(x, {5, 3});
  EXPECT_NEAR(prob.c(x).norm(), (0.5 * (xm.transpose() * xm - Matrix::Identity(3, 3))).norm(), 1e-12);
}

TEST(InfeasibilityGradient, MatchesFiniteDifferencesOnBuiltins) {
  for (const auto& prob : builtins()) {
    for (const auto& x : random_points(prob.dim_e, 17, 5)) {
      const Vector fd = fd_gradient([&](const Vector& y) { return infeasibility(prob, y); }, x, default_fd_step(x));
      EXPECT_LE(rel(fd, prob.dc_adjoint(x, prob.c(x))), 1e-6) << prob.name;
    }
  }
}

TEST(HessianFallback, FiniteDifferencesMatchAnalytic) {
  for (const auto& prob : builtins()) {
    ProblemInstance no_hess = prob;
    no_hess.hess_lagrangian = nullptr;
    Rng rng(6);
    const Vector x = rng.normal_vector(prob.dim_e);
    const Vector lambda = rng.normal_vector(prob.dim_f);
    const Vector xi = rng.normal_vector(prob.dim_e);
    EXPECT_LE(rel(hess_lagrangian_apply(no_hess, x, lambda, xi), hess_lagrangian_apply(prob, x, lambda, xi)), 1e-6)
        << prob.name;
  }
}

TEST(ValidateProblem, SpherePasses) {
  const auto prob = make_sphere_problem(2, vec({1.0, 0.0}));
  const auto pts = random_points(2, 1, 10);
  const auto report = validate_problem(prob, pts);
  EXPECT_EQ(report.points, 10);
  EXPECT_LE(report.max_gradient_error, kGradientFdTolerance);
  EXPECT_LE(report.max_adjoint_error, kAdjointTolerance);
  EXPECT_LE(report.max_linearity_error, kLinearityTolerance);
}

TEST(ValidateProblem, WrongGradientIsCaught) {
  auto prob = make_sphere_problem(2, vec({1.0, 0.0}));
  auto grad = prob.grad_f;
  prob.grad_f = [grad](const Vector& x) -> Vector { return 2.0 * grad(x); };
  const auto pts = random_points(2, 1, 3);
  try {
    validate_problem(prob, pts);
    ADD_FAILURE() << "wrong gradient accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::validation_failed);
    EXPECT_NE(std::string(e.what()).find("gradient check failed at trial point 0"), std::string::npos) << e.what();
  }
}

TEST(ValidateProblem, WrongAdjointIsCaught) {
  auto prob = make_random_quadratic_problem(6, 2, 1);
  auto adj = prob.dc_adjoint;
  prob.dc_adjoint = [adj](const Vector& x, const Vector& y) -> Vector { return 1.01 * adj(x, y); };
  const auto pts = random_points(6, 1, 2);
  try {
    validate_problem(prob, pts);
    ADD_FAILURE() << "wrong adjoint accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::validation_failed);
  }
}

TEST(ValidateProblem, AllBuiltinsPass) {
  for (const auto& prob : builtins()) {
    const auto pts = random_points(prob.dim_e, 3, 6);
    EXPECT_NO_THROW(validate_problem(prob, pts)) << prob.name;
  }
}

TEST(ValidateProblem, NeedsTrialPoints) {
  const auto prob = make_sphere_problem(2, vec({1.0, 0.0}));
  EXPECT_ERROR_KIND(validate_problem(prob, std::span<const Vector>{}), ErrorKind::invalid_argument);
}

TEST(Determinism, SameSeedSameInstance) {
  const auto a = make_stiefel_problem(StiefelCost::procrustes, 7, 2, 99);
  const auto b = make_stiefel_problem(StiefelCost::procrustes, 7, 2, 99);
  const Vector x = stiefel_start_point(7, 2, 3, 0.1);
  EXPECT_EQ(a.f(x), b.f(x));
  EXPECT_EQ(stiefel_start_point(7, 2, 3, 0.1), x);
  const auto c = make_random_quadratic_problem(8, 3, 5);
  const auto d = make_random_quadratic_problem(8, 3, 5);
  EXPECT_EQ(c.c(Vector::Ones(8)), d.c(Vector::Ones(8)));
}
