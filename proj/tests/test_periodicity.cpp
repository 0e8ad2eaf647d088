#include <doctest.h>

#include <cmath>
#include <map>
#include <tuple>

#include "fspec/periodicity.hpp"
#include "oracle/reference_values.hpp"

using namespace fspec;

namespace {

const auto cantor = make_weight<double>(2, Rational{1, 3});

const SpectrumTable<double>& table(double alpha, double beta, int n_max) {
  static std::map<std::tuple<double, double, int>, SpectrumTable<double>> cache;
  const auto key = std::make_tuple(alpha, beta, n_max);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, spectrum(make_bvp(alpha, beta), cantor, SpectrumCap<double>::index(n_max))).first;
  return it->second;
}

double rel(double x, double y) { return std::abs(x - y) / std::abs(y); }

}  // namespace

TEST_CASE("boundary pairs and index maps") {
  const auto [qb, qs] = periodicity_configs(cantor, GlueMode::kQuadratic);
  CHECK(qb.alpha == 0.0);
  CHECK(qb.beta == doctest::Approx(6.0));
  CHECK(qs.beta == doctest::Approx(2.0));
  const auto [cb, cs] = periodicity_configs(cantor, GlueMode::kCubic);
  CHECK(cb.alpha == doctest::Approx(108.0));
  CHECK(cb.beta == doctest::Approx(18.0));
  CHECK(cs.alpha == doctest::Approx(12.0));
  CHECK(cs.beta == doctest::Approx(6.0));

  CHECK(mapped_index(2, 3, GlueMode::kQuadratic) == 6);
  CHECK(mapped_index(2, 3, GlueMode::kCubic) == 7);
  CHECK(mapped_index(3, 0, GlueMode::kCubic) == 2);
  CHECK(std::string(to_string(GlueMode::kCubic)) == "cubic");
}

TEST_CASE("gap arcs match the scaled source at both ends") {
  const double a = 1.0 / 3, b = 1.0 / 3, y0 = 0.7, d2y0 = -2.5;
  for (const auto mode : {GlueMode::kQuadratic, GlueMode::kCubic}) {
    const GapFiller<double> f{a, b, 1, mode, y0, d2y0, a};
    const auto l = f.derivatives(a), r = f.derivatives(a + b);
    if (mode == GlueMode::kQuadratic) {
      // Even arc: same value and curvature at both ends, opposite slopes.
      CHECK(l(0) == doctest::Approx(y0));
      CHECK(r(0) == doctest::Approx(y0));
      CHECK(l(1) == doctest::Approx(-r(1)));
    } else {
      // Odd arc about the gap centre.
      CHECK(l(0) == doctest::Approx(-y0));
      CHECK(r(0) == doctest::Approx(y0));
      CHECK(f.derivatives(a + b / 2)(0) == doctest::Approx(0.0));
      CHECK(l(2) == doctest::Approx(-d2y0 / (a * a)));
    }
    CHECK(r(2) == doctest::Approx(d2y0 / (a * a)));
    // The arc solves the free equation: fourth derivative zero.
    CHECK(f.derivatives(a + 0.1 * b)(3) == doctest::Approx(f.derivatives(a + 0.9 * b)(3)));
  }
  GapFiller<double> neg{a, b, -1, GlueMode::kCubic, y0, d2y0, a};
  CHECK(neg.derivatives(a + b)(0) == doctest::Approx(-y0));
}

TEST_CASE("quadratic join builds big-problem eigenfunctions with even index") {
  const auto [big_cfg, small_cfg] = periodicity_configs(cantor, GlueMode::kQuadratic);
  const auto& small = table(0.0, 2.0, 4);
  const auto& big = table(0.0, 6.0, 8);
  for (int n = 1; n <= 4; ++n) {
    const auto g = glue_quadratic(cantor, small.pairs[static_cast<std::size_t>(n)]);
    CHECK(g.zero_count == 2 * n);
    CHECK(g.junction_mismatch <= 1e-6);
    CHECK(glued_boundary_residual(big_cfg, g) <= 1e-6);
    CHECK(glued_residual(cantor, g) <= 1e-4);
    CHECK(rel(g.target_lambda, big.pairs[static_cast<std::size_t>(2 * n)].lambda) <= 1e-6);
    CHECK(g.copy_signs.size() == 2);
  }
  CHECK_THROWS_AS(glue_quadratic(cantor, small.pairs[0]), DomainError);
}

TEST_CASE("cubic join builds big-problem eigenfunctions with odd index") {
  const auto [big_cfg, small_cfg] = periodicity_configs(cantor, GlueMode::kCubic);
  const auto& small = table(12.0, 6.0, 5);
  const auto& big = table(108.0, 18.0, 11);
  for (int n = 0; n <= 5; ++n) {
    const auto g = glue_cubic(cantor, small.pairs[static_cast<std::size_t>(n)]);
    CHECK(g.zero_count == 2 * n + 1);
    CHECK(g.junction_mismatch <= 1e-6);
    CHECK(glued_boundary_residual(big_cfg, g) <= 1e-6);
    CHECK(glued_residual(cantor, g) <= 1e-4);
    CHECK(rel(g.target_lambda, big.pairs[static_cast<std::size_t>(2 * n + 1)].lambda) <= 1e-6);
    CHECK(rel(g.target_lambda, 54 * oracle::kMu126[static_cast<std::size_t>(n)]) <= 1e-6);
  }
}

TEST_CASE("glue rejects inadmissible or inaccurate sources") {
  // Constant eigenfunction: y''(0) = 0, so no odd arc can match it.
  CHECK_THROWS_AS(glue_cubic(cantor, table(0.0, 2.0, 1).pairs[0]), MatchingError);

  auto broken = table(12.0, 6.0, 1).pairs[1];
  const auto last = static_cast<Eigen::Index>(broken.trajectory.size() - 1);
  broken.trajectory.states(0, last) *= 1.01;
  CHECK_THROWS_AS(glue_cubic(cantor, broken), MatchingError);

  CHECK_THROWS_AS(glue_cubic(make_weight(2, 0.25), table(12.0, 6.0, 1).pairs[1]), ConfigMismatch);
}

TEST_CASE("verify_identity on both joins") {
  const auto quad = verify_identity(table(0.0, 6.0, 8), table(0.0, 2.0, 4), GlueMode::kQuadratic);
  REQUIRE(quad.rows.size() == 5);
  CHECK(quad.all_pass);
  CHECK(quad.rows[0].deviation == 0.0);
  CHECK(quad.rows[2].mapped_index == 4);
  CHECK(quad.max_deviation <= 1e-6);

  const auto cub = verify_identity(table(108.0, 18.0, 11), table(12.0, 6.0, 5), GlueMode::kCubic);
  REQUIRE(cub.rows.size() == 6);
  CHECK(cub.all_pass);
  CHECK(cub.rows[0].scaled_mu == doctest::Approx(54 * cub.rows[0].mu));
  CHECK(cub.max_deviation <= 1e-6);

  CHECK_THROWS_AS(verify_identity(table(0.0, 6.0, 8), table(12.0, 6.0, 5), GlueMode::kCubic), ConfigMismatch);
  CHECK_THROWS_AS(verify_identity(table(108.0, 18.0, 11), table(12.0, 6.0, 5), GlueMode::kQuadratic),
                  ConfigMismatch);
}

TEST_CASE("identity flags a deviation beyond tolerance") {
  auto big = table(0.0, 6.0, 8);
  big.pairs[4].lambda *= 1.01;
  const auto r = verify_identity(big, table(0.0, 2.0, 4), GlueMode::kQuadratic);
  CHECK_FALSE(r.all_pass);
  CHECK(r.rows[2].flagged);
  CHECK_FALSE(r.rows[1].flagged);
}

TEST_CASE("the two big problems share every other eigenvalue") {
  // Odd-index eigenvalues of (0, 6) coincide with even-index ones of (108, 18).
  const auto& quad = table(0.0, 6.0, 11);
  const auto& cub = table(108.0, 18.0, 10);
  for (std::size_t m = 0; 2 * m < cub.pairs.size(); ++m)
    CHECK(rel(quad.pairs[2 * m + 1].lambda, cub.pairs[2 * m].lambda) <= 1e-7);
  CHECK(rel(quad.pairs[2].lambda, cub.pairs[1].lambda) > 0.5);
}
