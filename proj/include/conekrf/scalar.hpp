#pragma once

#include <cmath>
#include <type_traits>

#include <boost/multiprecision/float128.hpp>

namespace conekrf {

/// Extended precision used where double cancellation is unavoidable
/// (second log-derivatives of densities that decay like e^u).
using quad = boost::multiprecision::float128;

namespace detail {

// log1p / expm1 for double go to libm; the quad backend in this boost
// version does not expose them, and quad has enough headroom for the
// direct formulas on our arguments.
template <class Real>
Real log1p(const Real& x) {
  if constexpr (std::is_floating_point_v<Real>) {
    return std::log1p(x);
  } else {
    using std::log;
    return log(Real(1) + x);
  }
}

template <class Real>
Real expm1(const Real& x) {
  if constexpr (std::is_floating_point_v<Real>) {
    return std::expm1(x);
  } else {
    using std::exp;
    return exp(x) - Real(1);
  }
}

/// log(1 + e^u) without overflow.
template <class Real>
Real softplus(const Real& u) {
  using std::exp;
  if (u > Real(0)) return u + detail::log1p(Real(exp(-u)));
  return detail::log1p(Real(exp(u)));
}

/// e^u / (1 + e^u).
template <class Real>
Real logistic(const Real& u) {
  using std::exp;
  if (u > Real(0)) return Real(1) / (Real(1) + exp(-u));
  const Real e = exp(u);
  return e / (Real(1) + e);
}

}  // namespace detail
}  // namespace conekrf
