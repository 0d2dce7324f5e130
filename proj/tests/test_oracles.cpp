#include "landing/finite_difference.hpp"
#include "landing/metric.hpp"
#include "landing/oracles.hpp"
#include "landing/problem.hpp"
#include "landing/rng.hpp"

#include <cmath>

#include "test_support.hpp"

using namespace landing;
using namespace landing::testing;

TEST(FdGradient, Examples) {
  const Vector x = vec({0.3, -1.2, 2.0});
  EXPECT_LE(fd_gradient([](const Vector&) { return 4.2; }, x, 1e-5).norm(), 1e-15);
  EXPECT_LE((fd_gradient([](const Vector& y) { return 0.5 * y.squaredNorm(); }, x, 1e-4) - x).norm(), 1e-7);
  const auto sphere = make_sphere_problem(2, vec({1.0, 0.0}));
  const Vector at = vec({2.0, 0.0});
  const Vector g = fd_gradient([&](const Vector& y) { return infeasibility(sphere, y); }, at, default_fd_step(at));
  EXPECT_LE((g - vec({3.0, 0.0})).norm(), 1e-6);
}

TEST(MinNormQp, OrthonormalRows) {
  Matrix dc = Matrix::Zero(2, 4);
  dc(0, 1) = 1.0;
  dc(1, 3) = 1.0;
  const Vector rhs = vec({0.4, -2.0});
  EXPECT_LE((min_norm_qp_oracle(dc, Matrix::Identity(4, 4), rhs) - dc.transpose() * rhs).norm(), 1e-14);
}

TEST(MinNormQp, SphereHandValue) {
  const Matrix dc = (Matrix(1, 2) << 2.0, 0.0).finished();
  EXPECT_LE((min_norm_qp_oracle(dc, Matrix::Identity(2, 2), vec({-1.5})) - vec({-0.75, 0.0})).norm(), 1e-15);
}

TEST(MinNormQp, MatchesMetricGeometry) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto prob = make_random_quadratic_problem(10, 4, s);
    Rng rng(s + 31);
    const Vector x = rng.normal_vector(10);
    const Matrix j = dc_matrix(prob, x);
    const Vector rhs = -prob.c(x);
    const Vector d = normal_step_pseudoinverse(prob, EuclideanMetric{}, x, {NormalOperatorKind::identity, 1.0});
    EXPECT_LE(rel(min_norm_qp_oracle(j, Matrix::Identity(10, 10), rhs), d), 1e-9);
  }
}

TEST(MinNormQp, Errors) {
  EXPECT_ERROR_KIND(min_norm_qp_oracle(Matrix::Zero(1, 3), Matrix::Identity(3, 3), vec({1.0})),
                    ErrorKind::rank_deficient);
  const Matrix dc = (Matrix(1, 2) << 1.0, 0.0).finished();
  EXPECT_ERROR_KIND(min_norm_qp_oracle(dc, -Matrix::Identity(2, 2), vec({1.0})), ErrorKind::not_positive_definite);
}

TEST(EstimateOrder, QuadraticSequence) {
  std::vector<double> e;
  for (int k = 0; k < 8; ++k) e.push_back(std::pow(0.5, std::pow(2.0, k)));
  const auto fit = estimate_order(e);
  EXPECT_NEAR(fit.fitted_order, 2.0, 0.05);
  EXPECT_EQ(fit.samples.size(), 6u);  // 2^-64 and below sit under the floor
  EXPECT_LE(fit.fit_residual, 1e-10);
}

TEST(EstimateOrder, LinearSequence) {
  std::vector<double> e;
  for (int k = 0; k < 60; ++k) e.push_back(std::pow(0.5, k));
  const auto fit = estimate_order(e);
  EXPECT_NEAR(fit.fitted_order, 1.0, 0.05);
  EXPECT_EQ(fit.samples.back().first, 43);
}

TEST(EstimateOrder, SuperlinearWithNoiseReportsResidual) {
  std::vector<double> e;
  double v = 1e-1;
  Rng rng(4);
  for (int k = 0; k < 6 && v > 1e-13; ++k) {
    e.push_back(v * (1.0 + 0.2 * rng.uniform()));
    v = std::pow(v, 1.5);
  }
  const auto fit = estimate_order(e);
  EXPECT_NEAR(fit.fitted_order, 1.5, 0.15);
  EXPECT_GT(fit.fit_residual, 0.0);
}

TEST(EstimateOrder, TooFewSamples) {
  const std::vector<double> e = {1e-2, 1e-14, 1e-28};
  EXPECT_ERROR_KIND(estimate_order(e), ErrorKind::invalid_argument);
  EXPECT_ERROR_KIND(estimate_order(std::vector<double>{}), ErrorKind::invalid_argument);
}

TEST(EquivalenceSuite, DefaultSeedPasses) {
  const auto report = run_equivalence_suite({});
  EXPECT_TRUE(report.passed());
  EXPECT_EQ(report.properties.size(), 7u);
  for (const auto& p : report.properties) {
    EXPECT_GE(p.instances, 50) << p.name;
    EXPECT_LE(p.max_deviation, 1e-8) << p.name;
  }
  require_equivalence(report);
}

TEST(EquivalenceSuite, OtherSeedsAndSmallProfilePass) {
  EquivalenceOptions opts;
  opts.seed = 1234;
  EXPECT_TRUE(run_equivalence_suite(opts).passed());
  opts.profile = SizeProfile::small;
  EXPECT_TRUE(run_equivalence_suite(opts).passed());
}

TEST(EquivalenceSuite, FaultInjectionIsCaught) {
  EquivalenceOptions opts;
  opts.inject_adjoint_fault = true;
  const auto report = run_equivalence_suite(opts);
  EXPECT_FALSE(report.passed());
  try {
    require_equivalence(report);
    ADD_FAILURE() << "expected property_violated";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::property_violated);
    EXPECT_NE(std::string(e.what()).find("pseudoinverse_step_is_gradient_step"), std::string::npos) << e.what();
  }
}
