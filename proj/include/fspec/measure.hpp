#pragma once

// Cantor-type self-similar weight functions P on [0,1] and the singular
// measure dP they induce.
//
// P is built from kappa affine copies of itself: on cell k = [k(a+b), k(a+b)+a]
// it equals (k + P(rescaled x)) / kappa, and on the kappa-1 gaps of length b
// between cells it is constant.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "fspec/errors.hpp"
#include "fspec/rational.hpp"

namespace fspec {

template <typename Scalar = double>
struct WeightParams {
  int kappa = 2;
  Scalar a{};
  Scalar b{};
  /// Exact copy scale, present when the weight was specified rationally.
  std::optional<Rational> a_exact;

  Scalar stride() const { return a + b; }
  std::optional<Rational> b_exact() const {
    if (!a_exact) return std::nullopt;
    const auto ka = mul(Rational{kappa, 1}, *a_exact);
    if (!ka) return std::nullopt;
    const auto num = sub(Rational{1, 1}, *ka);
    if (!num) return std::nullopt;
    return div(*num, Rational{kappa - 1, 1});
  }
};

template <typename Scalar>
WeightParams<Scalar> make_weight(int kappa, Scalar a) {
  if (kappa < 2) throw DomainError("make_weight: kappa must be >= 2");
  if (!(a > Scalar(0)) || !(a * Scalar(kappa) < Scalar(1)))
    throw DomainError("make_weight: copy scale a must lie in (0, 1/kappa)");
  WeightParams<Scalar> w;
  w.kappa = kappa;
  w.a = a;
  w.b = (Scalar(1) - Scalar(kappa) * a) / Scalar(kappa - 1);
  return w;
}

template <typename Scalar = double>
WeightParams<Scalar> make_weight(int kappa, const Rational& a) {
  if (kappa < 2) throw DomainError("make_weight: kappa must be >= 2");
  // num * kappa >= den without overflow
  if (a.num <= 0 || a.num > (a.den - 1) / kappa)
    throw DomainError("make_weight: copy scale a must lie in (0, 1/kappa)");
  WeightParams<Scalar> w;
  w.kappa = kappa;
  w.a_exact = a;
  w.a = a.template to<Scalar>();
  const auto b = w.b_exact();
  w.b = b ? b->template to<Scalar>() : (Scalar(1) - Scalar(kappa) * w.a) / Scalar(kappa - 1);
  return w;
}

template <typename Scalar>
bool same_weight(const WeightParams<Scalar>& x, const WeightParams<Scalar>& y) {
  return x.kappa == y.kappa && x.a == y.a;
}

/// Number of kappa-adic levels needed for P to reach machine precision.
template <typename Scalar>
int default_depth_cap(int kappa) {
  const Scalar bits = Scalar(std::numeric_limits<Scalar>::digits);
  return static_cast<int>(std::ceil(bits * std::log(Scalar(2)) / std::log(Scalar(kappa))));
}

/// Evaluates P(x) by descending through the cell hierarchy. The descent stops
/// on reaching a gap (where P is exact) or after depth_cap levels, with
/// absolute error at most kappa^-depth_cap.
template <typename Scalar>
Scalar p_eval(const WeightParams<Scalar>& w, Scalar x, int depth_cap) {
  if (!(x >= Scalar(0) && x <= Scalar(1))) throw DomainError("p_eval: x outside [0,1]");
  if (depth_cap < 1) throw DomainError("p_eval: depth_cap must be >= 1");
  const Scalar stride = w.stride();
  const Scalar inv_kappa = Scalar(1) / Scalar(w.kappa);
  Scalar result = 0;
  Scalar scale = 1;
  for (int depth = 0; depth < depth_cap; ++depth) {
    if (x == Scalar(0)) return result;
    if (x == Scalar(1)) return result + scale;
    scale *= inv_kappa;
    int k = static_cast<int>(std::floor(x / stride));
    if (k > w.kappa - 1) k = w.kappa - 1;
    const Scalar offset = x - Scalar(k) * stride;
    if (offset > w.a) return result + Scalar(k + 1) * scale;
    result += Scalar(k) * scale;
    x = offset / w.a;
    if (x > Scalar(1)) x = Scalar(1);
    if (x < Scalar(0)) x = Scalar(0);
  }
  return result;
}

template <typename Scalar>
Scalar p_eval(const WeightParams<Scalar>& w, Scalar x) {
  return p_eval(w, x, default_depth_cap<Scalar>(w.kappa));
}

template <typename Scalar = double>
struct Interval {
  Scalar lo{};
  Scalar hi{};
};

template <typename Scalar = double>
struct Gap {
  Scalar lo{};
  Scalar hi{};
  /// Constant value of P on the gap.
  Scalar p_value{};
};

/// Generation-g cells of P: kappa^g closed cells of length a^g, each carrying
/// measure kappa^-g, separated by open gaps on which P is constant.
template <typename Scalar = double>
struct CellDecomposition {
  int level = 0;
  Scalar cell_length{};
  Scalar cell_mass{};
  std::vector<Interval<Scalar>> cells;
  std::vector<Gap<Scalar>> gaps;
  /// True when endpoints were accumulated in exact rational arithmetic.
  bool exact = false;
};

inline constexpr std::size_t kDefaultMaxCells = std::size_t(1) << 22;

namespace detail {

template <typename Scalar>
std::size_t checked_cell_count(int kappa, int level, std::size_t max_cells) {
  if (level < 0) throw DomainError("decompose: level must be >= 0");
  std::size_t count = 1;
  for (int i = 0; i < level; ++i) {
    if (count > max_cells / static_cast<std::size_t>(kappa))
      throw ResourceError("decompose: kappa^level exceeds the configured cell cap");
    count *= static_cast<std::size_t>(kappa);
  }
  return count;
}

/// Exact left endpoints and common length of the generation-`level` cells,
/// or nullopt if the weight is not rational or the arithmetic overflows.
template <typename Scalar>
std::optional<std::pair<std::vector<Rational>, Rational>> exact_cells(const WeightParams<Scalar>& w, int level) {
  if (!w.a_exact) return std::nullopt;
  const auto b = w.b_exact();
  if (!b) return std::nullopt;
  const auto stride = add(*w.a_exact, *b);
  if (!stride) return std::nullopt;
  std::vector<Rational> lefts{Rational{0, 1}};
  Rational length{1, 1};
  for (int g = 0; g < level; ++g) {
    const auto step = mul(*stride, length);
    const auto next_length = mul(*w.a_exact, length);
    if (!step || !next_length) return std::nullopt;
    std::vector<Rational> next;
    next.reserve(lefts.size() * static_cast<std::size_t>(w.kappa));
    for (const Rational& left : lefts) {
      for (int k = 0; k < w.kappa; ++k) {
        const auto shift = mul(Rational{k, 1}, *step);
        if (!shift) return std::nullopt;
        const auto x = add(left, *shift);
        if (!x) return std::nullopt;
        next.push_back(*x);
      }
    }
    lefts = std::move(next);
    length = *next_length;
  }
  return std::make_pair(std::move(lefts), length);
}

template <typename Scalar>
std::pair<std::vector<Scalar>, Scalar> float_cells(const WeightParams<Scalar>& w, int level) {
  std::vector<Scalar> lefts{Scalar(0)};
  Scalar length = 1;
  for (int g = 0; g < level; ++g) {
    std::vector<Scalar> next;
    next.reserve(lefts.size() * static_cast<std::size_t>(w.kappa));
    for (Scalar left : lefts)
      for (int k = 0; k < w.kappa; ++k) next.push_back(left + Scalar(k) * w.stride() * length);
    lefts = std::move(next);
    length *= w.a;
  }
  return {std::move(lefts), length};
}

}  // namespace detail

template <typename Scalar>
CellDecomposition<Scalar> decompose(const WeightParams<Scalar>& w, int level,
                                    std::size_t max_cells = kDefaultMaxCells) {
  const std::size_t count = detail::checked_cell_count<Scalar>(w.kappa, level, max_cells);
  CellDecomposition<Scalar> out;
  out.level = level;
  out.cells.reserve(count);
  out.gaps.reserve(count - 1);
  Scalar mass_denominator = 1;
  for (int i = 0; i < level; ++i) mass_denominator *= Scalar(w.kappa);
  out.cell_mass = Scalar(1) / mass_denominator;

  if (auto exact = detail::exact_cells(w, level)) {
    const auto& [lefts, length] = *exact;
    out.exact = true;
    out.cell_length = length.template to<Scalar>();
    for (const Rational& left : lefts) {
      const auto right = add(left, length);
      if (!right) {
        out.exact = false;
        break;
      }
      out.cells.push_back({left.template to<Scalar>(), right->template to<Scalar>()});
    }
  }
  if (!out.exact) {
    out.cells.clear();
    auto [lefts, length] = detail::float_cells(w, level);
    out.cell_length = length;
    for (std::size_t i = 0; i < lefts.size(); ++i) {
      const Scalar right = i + 1 == lefts.size() ? Scalar(1) : lefts[i] + length;
      out.cells.push_back({lefts[i], right});
    }
  }
  for (std::size_t i = 0; i + 1 < out.cells.size(); ++i)
    out.gaps.push_back({out.cells[i].hi, out.cells[i + 1].lo, Scalar(i + 1) / mass_denominator});
  return out;
}

/// Generation-`level` quadrature for the Stieltjes integral of f against dP:
/// the mean of f over cell midpoints, accumulated as a tree of per-cell means.
template <typename Scalar, typename F>
Scalar stieltjes_integral(const WeightParams<Scalar>& w, F&& f, int level) {
  if (level < 1) throw DomainError("stieltjes_integral: level must be >= 1");
  detail::checked_cell_count<Scalar>(w.kappa, level, kDefaultMaxCells);
  const Scalar stride = w.stride();
  auto recurse = [&](auto&& self, Scalar left, Scalar length, int depth) -> Scalar {
    if (depth == 0) return f(left + length / Scalar(2));
    Scalar sum = 0;
    for (int k = 0; k < w.kappa; ++k) sum += self(self, left + Scalar(k) * stride * length, length * w.a, depth - 1);
    return sum / Scalar(w.kappa);
  };
  return recurse(recurse, Scalar(0), Scalar(1), level);
}

}  // namespace fspec
