#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/eigen.hpp>

namespace crn {

/// Arbitrary-precision rational without expression templates, so it composes
/// with Eigen dense types.
using Rational =
    boost::multiprecision::number<boost::multiprecision::cpp_rational_backend, boost::multiprecision::et_off>;

/// Exact conversion: every finite double is a dyadic rational.
inline Rational to_rational(double v) { return Rational(v); }

}  // namespace crn
