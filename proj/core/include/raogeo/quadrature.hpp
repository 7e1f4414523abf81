#pragma once

#include <functional>
#include <span>

#include "raogeo/types.hpp"

namespace raogeo {

struct QuadratureOptions {
  double tol = 1e-10;  // relative to max(1, |integral|)
  int max_intervals = 4000;
};

struct QuadratureResult {
  Vector value;
  double error = 0.0;  // estimated absolute error, max over components
  int intervals = 0;
};

struct ScalarQuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

/// Globally adaptive 15-point Gauss-Kronrod integration of a vector-valued
/// integrand over [lo, hi], initially split at `breakpoints` (which must lie
/// inside the interval) and `initial_panels` equal panels.
///
/// Throws NumericError carrying the error estimate when the tolerance is
/// not met within `max_intervals` subintervals.
QuadratureResult integrate(const std::function<Vector(double)>& f, int dim,
                           double lo, double hi,
                           const QuadratureOptions& opts = {},
                           std::span<const double> breakpoints = {},
                           int initial_panels = 8);

ScalarQuadratureResult integrate_scalar(const std::function<double(double)>& f,
                                        double lo, double hi,
                                        const QuadratureOptions& opts = {},
                                        std::span<const double> breakpoints = {},
                                        int initial_panels = 8);

}  // namespace raogeo
