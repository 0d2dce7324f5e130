#pragma once

#include "landing/errors.hpp"

#include <functional>

namespace landing {

// ε^{1/3}·max(1, ‖x‖)
double default_fd_step(const Vector& x);

// Central-difference gradient, coordinate by coordinate.
Vector fd_gradient(const std::function<double(const Vector&)>& fn, const Vector& x, double h);

}  // namespace landing
