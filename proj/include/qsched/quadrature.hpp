#pragma once

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace qsched {

// Result of a numerical evaluation together with its achieved error.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

// Adaptive 15-point Gauss-Kronrod on [a, b]. `converged` is false when the
// error estimate misses rel_tol * L1 after max_depth bisections.
template <class F>
Estimate integrate(F&& f, double a, double b, double rel_tol,
                   unsigned max_depth = 40) {
  if (!(b > a)) return {};
  double error = 0.0;
  double l1 = 0.0;
  double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, max_depth, rel_tol, &error, &l1);
  bool ok = std::isfinite(value) &&
            error <= 10.0 * rel_tol * l1 + std::numeric_limits<double>::min();
  return {value, error, ok};
}

}  // namespace qsched
