#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>

namespace fspec {

/// Exact rational with 64-bit numerator and denominator. Arithmetic that would
/// overflow yields std::nullopt so callers can fall back to floating point.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static constexpr std::optional<Rational> make(std::int64_t n, std::int64_t d) {
    if (d == 0) return std::nullopt;
    if (d < 0) {
      if (n == INT64_MIN || d == INT64_MIN) return std::nullopt;
      n = -n;
      d = -d;
    }
    const std::int64_t g = std::gcd(n, d);
    return Rational{n / g, d / g};
  }

  template <typename Scalar>
  Scalar to() const {
    return static_cast<Scalar>(num) / static_cast<Scalar>(den);
  }

  friend bool operator==(const Rational&, const Rational&) = default;
};

inline std::optional<Rational> add(const Rational& x, const Rational& y) {
  const std::int64_t g = std::gcd(x.den, y.den);
  std::int64_t lhs, rhs, num, den;
  if (__builtin_mul_overflow(x.num, y.den / g, &lhs) || __builtin_mul_overflow(y.num, x.den / g, &rhs) ||
      __builtin_add_overflow(lhs, rhs, &num) || __builtin_mul_overflow(x.den / g, y.den, &den))
    return std::nullopt;
  return Rational::make(num, den);
}

inline std::optional<Rational> mul(const Rational& x, const Rational& y) {
  const std::int64_t g1 = std::gcd(x.num, y.den);
  const std::int64_t g2 = std::gcd(y.num, x.den);
  const std::int64_t n1 = g1 ? x.num / g1 : x.num, d2 = g1 ? y.den / g1 : y.den;
  const std::int64_t n2 = g2 ? y.num / g2 : y.num, d1 = g2 ? x.den / g2 : x.den;
  std::int64_t num, den;
  if (__builtin_mul_overflow(n1, n2, &num) || __builtin_mul_overflow(d1, d2, &den)) return std::nullopt;
  return Rational::make(num, den);
}

inline std::optional<Rational> sub(const Rational& x, const Rational& y) {
  return add(x, Rational{-y.num, y.den});
}

inline std::optional<Rational> div(const Rational& x, const Rational& y) {
  if (y.num == 0) return std::nullopt;
  return mul(x, *Rational::make(y.den, y.num));
}

/// Parses "p/q", a plain integer, or a terminating decimal such as "0.25".
inline std::optional<Rational> parse_rational(std::string_view text) {
  auto parse_int = [](std::string_view s) -> std::optional<std::int64_t> {
    if (s.empty()) return std::nullopt;
    std::size_t i = 0;
    bool neg = false;
    if (s[0] == '+' || s[0] == '-') {
      neg = s[0] == '-';
      i = 1;
    }
    if (i == s.size()) return std::nullopt;
    std::int64_t v = 0;
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
      if (__builtin_mul_overflow(v, 10, &v) || __builtin_add_overflow(v, s[i] - '0', &v)) return std::nullopt;
    }
    return neg ? -v : v;
  };
  const auto slash = text.find('/');
  const auto point = text.find('.');
  if (point != std::string_view::npos && slash == std::string_view::npos) {
    const std::string_view frac = text.substr(point + 1);
    if (frac.empty() || frac.find_first_not_of("0123456789") != std::string_view::npos) return std::nullopt;
    std::string digits(text.substr(0, point));
    if (digits.empty() || digits == "-" || digits == "+") digits += '0';
    digits += frac;
    const auto n = parse_int(digits);
    if (!n || frac.size() > 18) return std::nullopt;
    std::int64_t d = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) d *= 10;
    return Rational::make(*n, d);
  }
  if (slash == std::string_view::npos) {
    const auto n = parse_int(text);
    if (!n) return std::nullopt;
    return Rational{*n, 1};
  }
  const auto n = parse_int(text.substr(0, slash));
  const auto d = parse_int(text.substr(slash + 1));
  if (!n || !d) return std::nullopt;
  return Rational::make(*n, *d);
}

inline std::string to_string(const Rational& r) {
  return r.den == 1 ? std::to_string(r.num) : std::to_string(r.num) + "/" + std::to_string(r.den);
}

}  // namespace fspec
