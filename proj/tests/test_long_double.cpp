#include <doctest.h>

#include <cmath>

#include "fspec/asymptotics.hpp"
#include "fspec/periodicity.hpp"
#include "oracle/reference_values.hpp"

using namespace fspec;

TEST_CASE("long double instantiation reproduces the double results") {
  const auto w = make_weight<long double>(2, Rational{1, 3});
  SolverOptions<long double> opts;
  opts.grid_generation = 8;
  const auto t = spectrum(make_bvp(12.0L, 6.0L), w, SpectrumCap<long double>::index(2), opts);
  REQUIRE(t.pairs.size() == 3);
  for (std::size_t n = 0; n < 3; ++n) {
    CHECK(t.pairs[n].zero_count == static_cast<int>(n));
    CHECK(std::abs(double(t.pairs[n].lambda) / oracle::kMu126[n] - 1) <= 1e-4);
  }
  const auto g = glue_cubic(w, t.pairs[1]);
  CHECK(g.zero_count == 3);
  CHECK(glued_boundary_residual(periodicity_configs(w, GlueMode::kCubic).first, g) <= 1e-6L);
  CHECK(std::abs(spectral_exponent(w) - 0.17376534287144L) <= 1e-13L);
  CHECK(std::abs(p_eval(w, 0.25L) - 1.0L / 3) <= 1e-12L);
}
