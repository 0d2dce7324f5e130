#include "landing/oracles.hpp"

#include "landing/linalg.hpp"
#include "landing/rng.hpp"
#include "landing/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace landing {

double default_fd_step(const Vector& x) {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, x.norm());
}

Vector fd_gradient(const std::function<double(const Vector&)>& fn, const Vector& x, double h) {
  if (!(h > 0.0)) fail(ErrorKind::invalid_argument, "finite-difference step must be positive");
  Vector g(x.size());
  Vector y = x;
  for (Index i = 0; i < x.size(); ++i) {
    y(i) = x(i) + h;
    const double up = fn(y);
    y(i) = x(i) - h;
    const double down = fn(y);
    y(i) = x(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

Vector min_norm_qp_oracle(const Matrix& dc, const Matrix& g, const Vector& rhs) {
  const Index m = dc.rows();
  const Index n = dc.cols();
  linalg::split_row_space(dc);
  Eigen::LLT<Matrix> chol(g);
  if (chol.info() != Eigen::Success) fail(ErrorKind::not_positive_definite, "G is not positive definite");
  Matrix kkt = Matrix::Zero(n + m, n + m);
  kkt.topLeftCorner(n, n) = g;
  kkt.topRightCorner(n, m) = dc.transpose();
  kkt.bottomLeftCorner(m, n) = dc;
  Vector b = Vector::Zero(n + m);
  b.tail(m) = rhs;
  return Eigen::FullPivLU<Matrix>(kkt).solve(b).head(n);
}

RateFit estimate_order(std::span<const double> errors, double floor) {
  RateFit fit;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    if (!(errors[k] > floor) || !std::isfinite(errors[k])) break;
    fit.samples.emplace_back(static_cast<Index>(k), errors[k]);
  }
  if (fit.samples.size() < kMinOrderSamples) {
    std::ostringstream msg;
    msg << "estimate_order needs at least " << kMinOrderSamples << " errors above " << floor << ", got "
        << fit.samples.size();
    fail(ErrorKind::invalid_argument, msg.str());
  }
  const std::size_t pairs = fit.samples.size() - 1;
  Matrix design(static_cast<Index>(pairs), 2);
  Vector target(static_cast<Index>(pairs));
  for (std::size_t i = 0; i < pairs; ++i) {
    design(static_cast<Index>(i), 0) = std::log(fit.samples[i].second);
    design(static_cast<Index>(i), 1) = 1.0;
    target(static_cast<Index>(i)) = std::log(fit.samples[i + 1].second);
  }
  const Vector coef = design.colPivHouseholderQr().solve(target);
  fit.fitted_order = coef(0);
  fit.fit_residual = (design * coef - target).norm() / std::sqrt(static_cast<double>(pairs));
  return fit;
}

bool EquivalenceReport::passed() const {
  for (const auto& p : properties)
    if (!p.passed) return false;
  return true;
}

namespace {

struct Instance {
  std::uint64_t seed;
  ProblemInstance prob;
  Vector x;
  Matrix g_tangent;
  Matrix g_normal;
  Matrix g_normal_alt;
  Matrix normal_shift;
  Matrix normal_shift_alt;
  Matrix b;
  double beta_pen;
};

Instance make_instance(const EquivalenceOptions& opt, Index i) {
  const std::uint64_t seed = mix_seed(opt.seed, static_cast<std::uint64_t>(i));
  Rng rng(seed);
  const bool small = opt.profile == SizeProfile::small;
  const Index m = rng.uniform_int(1, small ? 3 : 8);
  const Index n = rng.uniform_int(m + 1, small ? 8 : 20);
  Instance inst{seed, make_random_quadratic_problem(n, m, seed), rng.normal_vector(n),
                rng.random_spd(n), rng.random_spd(n), rng.random_spd(n),
                0.5 * rng.normal_matrix(n, m), 0.5 * rng.normal_matrix(n, m),
                rng.random_spd(n), rng.uniform(0.5, 3.0)};
  if (opt.inject_adjoint_fault) {
    auto adjoint = inst.prob.dc_adjoint;
    inst.prob.dc_adjoint = [adjoint](const Vector& x, const Vector& y) -> Vector { return 1.1 * adjoint(x, y); };
  }
  return inst;
}

// Normal space spanned by Dcᵀ + shift: transversal to ker Dc for small generic shifts.
ObliqueProjectorField shifted_projector(const Matrix& shift) {
  return projector_from_normal_space(
      [shift](const Vector&, const Matrix& dc) -> Matrix { return dc.transpose() + shift; });
}

MetricSpec random_metric(const Instance& inst, const Matrix& shift, const Matrix& g_normal) {
  return ConstructedMetric{shifted_projector(shift), constant_operator_field(inst.g_tangent),
                           constant_operator_field(g_normal)};
}

// G_N = Dcᵀ H⁻¹ Dc at each point, with H ∈ {identity, gram_euclid}.
OperatorField pseudoinverse_normal_restriction(const ProblemInstance& prob, NormalOperatorKind kind) {
  return [prob, kind](const Vector& x) -> Matrix {
    const Matrix j = dc_matrix(prob, x);
    if (kind == NormalOperatorKind::identity) return j.transpose() * j;
    const Matrix jjt = j * j.transpose();
    return j.transpose() * linalg::solve_spd(0.5 * (jjt + jjt.transpose()), j);
  };
}

// −G⁻¹Dcᵀ (Dc G⁻¹ Dcᵀ)⁻¹ H c
Vector g_pseudoinverse_step(const PointGeometry& geo, NormalOperatorChoice h, const Vector& c) {
  const Matrix& j = geo.jacobian();
  Matrix adj(j.cols(), j.rows());
  for (Index i = 0; i < j.rows(); ++i) adj.col(i) = geo.metric_inverse_apply(j.row(i).transpose());
  return -adj * Eigen::FullPivLU<Matrix>(j * adj).solve(geo.normal_operator(h) * c);
}

double deviation(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

class Recorder {
 public:
  explicit Recorder(double tol) : tol_(tol) {}

  void record(const std::string& name, std::uint64_t seed, double dev) {
    PropertyResult& p = lookup(name);
    ++p.instances;
    if (p.instances == 1 || !(dev <= p.max_deviation)) {
      p.max_deviation = std::isnan(dev) ? std::numeric_limits<double>::infinity() : dev;
      p.worst_seed = seed;
    }
    p.passed = p.max_deviation <= tol_;
  }

  std::vector<PropertyResult> results() const { return results_; }

 private:
  PropertyResult& lookup(const std::string& name) {
    for (auto& p : results_)
      if (p.name == name) return p;
    results_.push_back(PropertyResult{name, 0.0, 0, 0, true});
    return results_.back();
  }

  double tol_;
  std::vector<PropertyResult> results_;
};

void check_instance(const Instance& inst, Recorder& rec) {
  const ProblemInstance& prob = inst.prob;
  const Vector& x = inst.x;
  const std::uint64_t seed = inst.seed;
  const NormalOperatorChoice id{NormalOperatorKind::identity, 1.0};
  const NormalOperatorChoice ge{NormalOperatorKind::gram_euclid, 1.0};
  const NormalOperatorChoice gg{NormalOperatorKind::gram_g, 1.0};

  const MetricSpec base = random_metric(inst, inst.normal_shift, inst.g_normal);

  // Gradient normal step under G_N = Dc*H⁻¹Dc equals the H-pseudoinverse step.
  for (const NormalOperatorChoice h : {id, ge}) {
    const MetricSpec adapted = ConstructedMetric{shifted_projector(inst.normal_shift), constant_operator_field(inst.g_tangent),
                                                 pseudoinverse_normal_restriction(prob, h.kind)};
    rec.record("pseudoinverse_step_is_gradient_step", seed,
               deviation(normal_step_gradient(prob, adapted, x), normal_step_pseudoinverse(prob, adapted, x, h)));
  }

  // −Dc†ᵍ H c built from G⁻¹ (which involves G_N) depends only on the normal space.
  {
    const MetricSpec other = random_metric(inst, inst.normal_shift, inst.g_normal_alt);
    const PointGeometry geo(prob, other, x);
    for (const NormalOperatorChoice h : {id, ge}) {
      rec.record("normal_step_independent_of_normal_metric", seed,
                 deviation(g_pseudoinverse_step(geo, h, prob.c(x)), normal_step_pseudoinverse(prob, base, x, h)));
    }
  }

  // H = Dc Dc*ᵍ retrieves d_N = −Dc*ᵍ c.
  rec.record("gram_g_pseudoinverse_is_metric_gradient", seed,
             deviation(normal_step_pseudoinverse(prob, base, x, gg), normal_step_gradient(prob, base, x)));

  // Tangent step is invariant under a change of projector with fixed G_T.
  {
    const MetricSpec other = random_metric(inst, inst.normal_shift_alt, inst.g_normal);
    rec.record("tangent_step_independent_of_projector", seed,
               deviation(tangent_step(prob, other, x), tangent_step(prob, base, x)));
  }

  // SQP direction equals landing with G_T = B, N = (B ker Dc)^⊥, H = Id.
  {
    const Matrix b = inst.b;
    const ObliqueProjectorField proj = projector_from_normal_space([b](const Vector&, const Matrix& dc) -> Matrix {
      return linalg::orthogonal_complement(b * linalg::split_row_space(dc).null_basis);
    });
    const MetricSpec sqp_metric = ConstructedMetric{proj, constant_operator_field(b), identity_operator_field(prob.dim_e)};
    const LandingDirection d = landing_direction(prob, sqp_metric, x, id);
    rec.record("sqp_direction_is_landing_direction", seed, deviation(d.full, sqp_direction(prob, x, b).d));
  }

  // ∇_g L_β(x, λ) = −(d_T + d_N) with H = β Dc Dc*ᵍ.
  {
    const NormalOperatorChoice h{NormalOperatorKind::gram_g, inst.beta_pen};
    const LandingDirection d = landing_direction(prob, base, x, h);
    rec.record("augmented_lagrangian_is_landing", seed,
               deviation(augmented_lagrangian_gradient(prob, base, x, inst.beta_pen), -d.full));
  }

  // Pseudoinverse step is the minimum g-norm solution of Dc d = −Hc.
  {
    const PointGeometry geo(prob, base, x);
    const Matrix g = linalg::materialize(prob.dim_e, [&](const Vector& e) -> Vector { return geo.metric_apply(e); });
    for (const NormalOperatorChoice h : {id, ge}) {
      const Vector rhs = -(geo.normal_operator(h) * prob.c(x));
      rec.record("pseudoinverse_step_is_min_g_norm", seed,
                 deviation(geo.normal_step_pseudoinverse(h, prob.c(x)),
                           min_norm_qp_oracle(geo.jacobian(), 0.5 * (g + g.transpose()), rhs)));
    }
  }
}

}  // namespace

EquivalenceReport run_equivalence_suite(const EquivalenceOptions& options) {
  if (options.instances < 1) fail(ErrorKind::invalid_argument, "equivalence suite needs at least one instance");
  const auto start = std::chrono::steady_clock::now();
  Recorder rec(options.tolerance);
  for (Index i = 0; i < options.instances; ++i) {
    const Instance inst = make_instance(options, i);
    if (inst.prob.dim_f >= inst.prob.dim_e) fail(ErrorKind::invalid_argument, "instance violates m < n");
    check_instance(inst, rec);
  }
  EquivalenceReport report;
  report.properties = rec.results();
  report.tolerance = options.tolerance;
  report.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

void require_equivalence(const EquivalenceReport& report) {
  for (const auto& p : report.properties) {
    if (!p.passed) {
      std::ostringstream msg;
      msg << p.name << " violated: deviation " << p.max_deviation << " > " << report.tolerance
          << " (instance seed " << p.worst_seed << ")";
      fail(ErrorKind::property_violated, msg.str());
    }
  }
}

}  // namespace landing
