#pragma once

#include "landing/finite_difference.hpp"
#include "landing/metric.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace landing {

// Minimum ‖d‖_G subject to Dc d = rhs, from the dense KKT system [G Dcᵀ; Dc 0].
Vector min_norm_qp_oracle(const Matrix& dc, const Matrix& g, const Vector& rhs);

struct RateFit {
  std::vector<std::pair<Index, double>> samples;  // (k, e_k) kept for the fit
  double fitted_order = 0.0;
  double fit_residual = 0.0;  // RMS residual of the log-log fit
};

inline constexpr double kOrderFloor = 1e-13;
inline constexpr std::size_t kMinOrderSamples = 3;

// Least-squares slope of log e_{k+1} against log e_k over the leading run of errors above floor.
RateFit estimate_order(std::span<const double> errors, double floor = kOrderFloor);

enum class SizeProfile { small, medium };

struct EquivalenceOptions {
  std::uint64_t seed = 0;
  SizeProfile profile = SizeProfile::medium;
  Index instances = 50;
  double tolerance = 1e-8;
  bool inject_adjoint_fault = false;  // perturbs Dc* to exercise the failure path
};

struct PropertyResult {
  std::string name;
  double max_deviation = 0.0;
  std::uint64_t worst_seed = 0;
  Index instances = 0;
  bool passed = true;
};

struct EquivalenceReport {
  std::vector<PropertyResult> properties;
  double tolerance = 0.0;
  double elapsed_ms = 0.0;
  bool passed() const;
};

EquivalenceReport run_equivalence_suite(const EquivalenceOptions& options);
// Throws property_violated naming the first failing property and its instance seed.
void require_equivalence(const EquivalenceReport& report);

}  // namespace landing
