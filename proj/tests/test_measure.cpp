#include <doctest.h>

#include <cmath>
#include <random>

#include "fspec/measure.hpp"
#include "oracle/self_similar_transfer.hpp"

using namespace fspec;

namespace {
const auto cantor = make_weight<double>(2, Rational{1, 3});
}

TEST_CASE("make_weight derives the gap length") {
  CHECK(cantor.kappa == 2);
  CHECK(cantor.a == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(cantor.b == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(cantor.b_exact() == Rational{1, 3});

  const auto w3 = make_weight(3, 0.2);
  CHECK(w3.b == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(3 * w3.a + 2 * w3.b == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(make_weight(2, 0.5), DomainError);
  CHECK_THROWS_AS(make_weight(1, 0.2), DomainError);
  CHECK_THROWS_AS(make_weight(2, 0.0), DomainError);
  CHECK_THROWS_AS(make_weight<double>(2, Rational{1, 2}), DomainError);
}

TEST_CASE("p_eval on known points") {
  CHECK(p_eval(cantor, 0.0, 5) == 0.0);
  CHECK(p_eval(cantor, 1.0, 5) == 1.0);
  CHECK(p_eval(cantor, 0.5, 1) == 0.5);
  CHECK(p_eval(cantor, 1.0 / 9, 20) == doctest::Approx(0.25).epsilon(1e-15));
  // 1/4 lies in the Cantor set, where rounding in the descent costs about eps^0.63.
  CHECK(std::abs(p_eval(cantor, 0.25) - 1.0 / 3) <= 1e-10);
  CHECK_THROWS_AS(p_eval(cantor, -0.1), DomainError);
  CHECK_THROWS_AS(p_eval(cantor, 1.5), DomainError);
  CHECK_THROWS_AS(p_eval(cantor, 0.5, 0), DomainError);
}

TEST_CASE("p_eval truncation error is bounded by kappa^-depth") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    const double exact = p_eval(cantor, x);
    for (int depth : {3, 8, 15}) CHECK(std::abs(p_eval(cantor, x, depth) - exact) <= std::ldexp(1.0, -depth));
  }
}

TEST_CASE("self-similarity, symmetry and monotonicity on random points") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& w : {cantor, make_weight(3, 0.2), make_weight(4, 0.1)}) {
    double prev_x = 0, prev_p = 0;
    std::vector<double> xs(2000);
    for (auto& x : xs) x = u(rng);
    std::sort(xs.begin(), xs.end());
    for (const double x : xs) {
      const double p = p_eval(w, x);
      for (int k = 0; k < w.kappa; ++k) {
        const double y = std::min(1.0, k * w.stride() + w.a * x);
        CHECK(std::abs(p_eval(w, y) - (k + p) / w.kappa) <= 1e-12);
      }
      CHECK(p >= prev_p);
      prev_x = x;
      prev_p = p;
    }
    (void)prev_x;
  }
  for (int i = 0; i < 2000; ++i) {
    const double x = u(rng);
    CHECK(std::abs(p_eval(cantor, x) - (1 - p_eval(cantor, 1 - x))) <= 1e-12);
  }
}

TEST_CASE("decompose levels 0..2") {
  const auto d0 = decompose(cantor, 0);
  REQUIRE(d0.cells.size() == 1);
  CHECK(d0.gaps.empty());
  CHECK(d0.cells[0].lo == 0.0);
  CHECK(d0.cells[0].hi == 1.0);

  const auto d1 = decompose(cantor, 1);
  REQUIRE(d1.cells.size() == 2);
  REQUIRE(d1.gaps.size() == 1);
  CHECK(d1.exact);
  CHECK(d1.cells[0].hi == 1.0 / 3);
  CHECK(d1.cells[1].lo == 2.0 / 3);
  CHECK(d1.gaps[0].p_value == 0.5);

  const auto d2 = decompose(cantor, 2);
  REQUIRE(d2.cells.size() == 4);
  REQUIRE(d2.gaps.size() == 3);
  CHECK(d2.cell_length == doctest::Approx(1.0 / 9).epsilon(1e-15));
  CHECK(d2.gaps[0].p_value == 0.25);
  CHECK(d2.gaps[1].p_value == 0.5);
  CHECK(d2.gaps[2].p_value == 0.75);

  CHECK_THROWS_AS(decompose(cantor, 30, 1 << 10), ResourceError);
  CHECK_THROWS_AS(decompose(cantor, -1), DomainError);
}

TEST_CASE("cells are ordered and disjoint; P is constant on every gap") {
  for (const auto& w : {cantor, make_weight(3, 0.2), make_weight(2, 0.3)}) {
    const auto d = decompose(w, 8);
    double mass = 0;
    for (std::size_t i = 0; i < d.cells.size(); ++i) {
      CHECK(d.cells[i].lo >= 0.0);
      CHECK(d.cells[i].hi <= 1.0);
      CHECK(d.cells[i].lo < d.cells[i].hi);
      if (i > 0) CHECK(d.cells[i - 1].hi < d.cells[i].lo);
      mass += d.cell_mass;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (const auto& g : d.gaps) {
      for (int j = 0; j < 3; ++j) {
        const double x = g.lo + u(rng) * (g.hi - g.lo);
        CHECK(std::abs(p_eval(w, x) - g.p_value) <= 1e-12);
      }
    }
  }
}

TEST_CASE("stieltjes_integral moments") {
  for (int level : {1, 5, 12}) CHECK(stieltjes_integral(cantor, [](double) { return 1.0; }, level) == 1.0);
  CHECK(std::abs(stieltjes_integral(cantor, [](double x) { return x; }, 10) - 0.5) <= 1e-3);
  CHECK(std::abs(stieltjes_integral(cantor, [](double x) { return x * x; }, 12) - 0.375) <= 1e-3);
  CHECK_THROWS_AS(stieltjes_integral(cantor, [](double) { return 1.0; }, 0), DomainError);

  // Moments of dP from the self-similarity recursion.
  const oracle::SelfSimilarTransfer ss(3, 0.2L);
  const auto w3 = make_weight(3, 0.2);
  for (int n = 1; n <= 4; ++n)
    CHECK(stieltjes_integral(w3, [n](double x) { return std::pow(x, n); }, 9) ==
          doctest::Approx(double(ss.moment(n))).epsilon(1e-5));
}

TEST_CASE("quadrature consistency across levels") {
  auto f = [](double x) { return std::sin(3 * x); };
  for (int g = 2; g < 10; ++g) {
    const double lo = stieltjes_integral(cantor, f, g), hi = stieltjes_integral(cantor, f, g + 1);
    CHECK(std::abs(lo - hi) <= 3 * std::pow(1.0 / 3, g));
  }
}
