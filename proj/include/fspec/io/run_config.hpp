#pragma once

#include <optional>
#include <string>

#include "fspec/measure.hpp"
#include "fspec/rational.hpp"
#include "fspec/shooting.hpp"

namespace fspec::io {

/// Everything needed to reproduce one solve. Weight and boundary data plus
/// the solver knobs are the "mathematical" fields that enter the digest;
/// output paths do not.
struct RunConfig {
  int kappa = 2;
  Rational a{1, 3};
  double alpha = 0.0;
  double beta = 2.0;

  int grid_generation = 10;
  int substeps = 4;
  double scan_ratio = 1.15;
  double tol = 1e-8;
  double lambda_min = 1e-3;
  int renorm_every = 64;

  /// Exactly one of these selects the extent of the spectrum.
  std::optional<int> n_max;
  std::optional<double> lambda_max;

  std::string out;

  WeightParams<double> weight() const;
  BVPConfig<double> boundary() const;
  SolverOptions<double> solver() const;
  SpectrumCap<double> cap() const;
  /// Throws DomainError when a field is outside its valid range.
  void validate() const;
};

/// Exact copy scale from "p/q", an integer, or a terminating decimal.
Rational parse_scale(const std::string& text);

/// 16 hex digits of FNV-1a over a canonical rendering of the mathematical fields.
std::string digest(const RunConfig& cfg);

/// Shortest round-trip rendering of a double, '.' as decimal separator.
std::string format_number(double x);

}  // namespace fspec::io
