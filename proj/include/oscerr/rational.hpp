#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace oscerr {

/// Arbitrary-precision rational, always kept in canonical (reduced) form.
using Rational = mpq_class;

/// Parses "p", "-p/q", a terminating decimal such as "1.5", or either of the
/// latter with a decimal exponent ("1e-3", "2.5E4"), exactly.
Rational parse_rational(std::string_view text);

/// "p/q", or "p" when the denominator is one.
std::string to_string(const Rational& r);

/// Nearest binary64 value (mpq_get_d alone truncates).
double to_double(const Rational& r);

Rational factorial(int n);

}  // namespace oscerr
