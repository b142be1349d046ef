#pragma once

#include <functional>

namespace svlq::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive integral of a scalar function on [a, b] to relative tolerance
// `rel_tol`. Intervals flagged singular at `a`, starting at 0, or with an
// infinite end go through a double-exponential rule, which tolerates
// integrable endpoint singularities; the rest use adaptive Gauss-Kronrod.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10, bool singular_at_a = false);

// Fixed 16-point Gauss-Legendre rule on [a, b].
double gauss_legendre16(const std::function<double(double)>& f, double a, double b);

}  // namespace svlq::quad
