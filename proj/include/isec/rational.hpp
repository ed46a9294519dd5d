#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>

#include "isec/errors.hpp"

namespace isec {

/// Exact rational scalar used by instances declared exact. Conversions from
/// double are exact (every finite double is a dyadic rational), so loading a
/// JSON number into the exact path never rounds.
using Rational = boost::multiprecision::cpp_rational;

/// Parses "p/q", "p", "-p/q" or a plain decimal ("1.25", "-0.5") into an
/// exact rational. Returns nullopt on malformed input.
std::optional<Rational> parse_rational(const std::string& text);

/// Canonical "p" or "p/q" rendering, matching what parse_rational accepts.
std::string rational_to_string(const Rational& r);

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(double v) { return v; }

/// Scalar-generic helpers so kernels can be written once for double and
/// Rational.
template <class S>
struct scalar_traits;

template <>
struct scalar_traits<double> {
  static constexpr bool is_exact = false;
  static double from_double(double v) { return v; }
};

template <>
struct scalar_traits<Rational> {
  static constexpr bool is_exact = true;
  static Rational from_double(double v) { return Rational(v); }
};

// -- inline implementations --------------------------------------------------

inline std::optional<Rational> parse_rational(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      const std::string num = text.substr(0, slash);
      const std::string den = text.substr(slash + 1);
      if (num.empty() || den.empty()) return std::nullopt;
      const boost::multiprecision::cpp_int n(num);
      const boost::multiprecision::cpp_int d(den);
      if (d == 0) return std::nullopt;
      return Rational(n, d);
    }
    const auto dot = text.find('.');
    if (dot == std::string::npos) {
      return Rational(boost::multiprecision::cpp_int(text));
    }
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    const std::size_t frac_len = text.size() - dot - 1;
    if (frac_len == 0) return std::nullopt;
    bool neg = false;
    if (!digits.empty() && (digits[0] == '+' || digits[0] == '-')) {
      neg = digits[0] == '-';
      digits = digits.substr(1);
    }
    if (digits.empty()) return std::nullopt;
    boost::multiprecision::cpp_int mant(digits);
    boost::multiprecision::cpp_int den = 1;
    for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
    Rational r(mant, den);
    return neg ? -r : r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline std::string rational_to_string(const Rational& r) { return r.str(); }

}  // namespace isec
