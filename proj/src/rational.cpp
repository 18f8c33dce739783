#include "oscerr/rational.hpp"

#include <cctype>
#include <cmath>

#include "oscerr/errors.hpp"

namespace oscerr {

Rational parse_rational(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  if (s.empty()) throw ArgumentError("empty rational");

  if (auto e = s.find_first_of("eE"); e != std::string::npos) {
    const std::string exponent = s.substr(e + 1);
    const bool ok = !exponent.empty() && exponent.size() < 6 &&
                    exponent.find_first_not_of("+-0123456789") == std::string::npos &&
                    exponent.find_first_of("+-", 1) == std::string::npos;
    if (!ok || s.find('/') != std::string::npos) throw ArgumentError("malformed rational '" + s + "'");
    const int k = std::stoi(exponent);
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(k < 0 ? -k : k));
    Rational mantissa = parse_rational(s.substr(0, e));
    return k < 0 ? Rational(mantissa / scale) : Rational(mantissa * scale);
  }

  auto digits_only = [](std::string_view v, bool allow_sign) {
    if (v.empty()) return false;
    std::size_t i = 0;
    if (allow_sign && (v[0] == '-' || v[0] == '+')) i = 1;
    if (i == v.size()) return false;
    for (; i < v.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(v[i]))) return false;
    return true;
  };

  if (auto dot = s.find('.'); dot != std::string::npos) {
    std::string whole = s.substr(0, dot);
    std::string frac = s.substr(dot + 1);
    bool negative = !whole.empty() && whole[0] == '-';
    if (!whole.empty() && (whole[0] == '-' || whole[0] == '+')) whole.erase(whole.begin());
    if (whole.empty()) whole = "0";
    if (!digits_only(whole, false) || (!frac.empty() && !digits_only(frac, false)))
      throw ArgumentError("malformed rational '" + s + "'");
    mpz_class num(whole + frac);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
    Rational r(num, den);
    r.canonicalize();
    return negative ? Rational(-r) : r;
  }

  auto slash = s.find('/');
  std::string num = s.substr(0, slash);
  std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
  if (!digits_only(num, true) || !digits_only(den, false))
    throw ArgumentError("malformed rational '" + s + "'");
  if (num[0] == '+') num.erase(num.begin());
  mpz_class d(den);
  if (d == 0) throw ArgumentError("zero denominator in '" + s + "'");
  Rational r(mpz_class(num), d);
  r.canonicalize();
  return r;
}

std::string to_string(const Rational& r) { return r.get_str(); }

double to_double(const Rational& r) {
  const double truncated = r.get_d();
  if (r == Rational(truncated)) return truncated;
  const double away = std::nextafter(truncated, r > 0 ? HUGE_VAL : -HUGE_VAL);
  const Rational d_trunc = abs(r - Rational(truncated));
  const Rational d_away = abs(r - Rational(away));
  return d_away < d_trunc ? away : truncated;
}

Rational factorial(int n) {
  mpz_class f;
  mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(n));
  return Rational(f);
}

}  // namespace oscerr
