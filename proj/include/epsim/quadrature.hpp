#pragma once

#include <cmath>
#include <functional>

#include "epsim/errors.hpp"

namespace epsim {

/// Adaptive Simpson on [a, b] with absolute tolerance `tol`.
/// Throws NumericError when the recursion depth is exhausted without
/// meeting the tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 50);

}  // namespace epsim
