#include "svlq/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>

namespace svlq::quad {

Result integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 bool singular_at_a) {
  Result r;
  if (a == b) return r;
  const bool singular_end = singular_at_a || a == 0.0 || std::isinf(b);
  if (singular_end) {
    thread_local boost::math::quadrature::tanh_sinh<double> rule(15);
    double l1 = 0.0;
    r.value = rule.integrate(f, a, b, rel_tol, &r.error, &l1);
    return r;
  }
  r.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 30, rel_tol,
                                                                         &r.error);
  return r;
}

double gauss_legendre16(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 16>::integrate(f, a, b);
}

}  // namespace svlq::quad
