#pragma once

// Spectral periodicity: an eigenfunction y of a "small" problem, copied onto
// the kappa first-generation cells and joined across the gaps by explicit
// polynomial arcs, is an eigenfunction of a "big" problem with eigenvalue
// (kappa / a^3) * mu. Two joins are supported:
//
//   quadratic  small (0, 2a/b) -> big (0, 2/b),               index n -> kappa n
//   cubic      small (12a^2/b^2, 6a/b) -> big (12/b^2, 6/b),  index n -> kappa (n+1) - 1

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "fspec/errors.hpp"
#include "fspec/measure.hpp"
#include "fspec/quasi_ode.hpp"
#include "fspec/shooting.hpp"

namespace fspec {

enum class GlueMode { kQuadratic, kCubic };

inline const char* to_string(GlueMode mode) { return mode == GlueMode::kQuadratic ? "quadratic" : "cubic"; }

/// (big, small) boundary configurations related by the given join.
template <typename Scalar>
std::pair<BVPConfig<Scalar>, BVPConfig<Scalar>> periodicity_configs(const WeightParams<Scalar>& w, GlueMode mode) {
  const Scalar a = w.a, b = w.b;
  if (mode == GlueMode::kQuadratic)
    return {make_bvp(Scalar(0), Scalar(2) / b), make_bvp(Scalar(0), Scalar(2) * a / b)};
  return {make_bvp(Scalar(12) / (b * b), Scalar(6) / b), make_bvp(Scalar(12) * a * a / (b * b), Scalar(6) * a / b)};
}

/// Index in the big spectrum that the small index n maps to.
inline int mapped_index(int kappa, int n, GlueMode mode) {
  return mode == GlueMode::kQuadratic ? kappa * n : kappa * (n + 1) - 1;
}

/// Polynomial arc on one gap, in the local coordinate xi = x - gap.lo.
template <typename Scalar = double>
struct GapFiller {
  Scalar lo{};
  Scalar length{};
  int sign = 1;
  GlueMode mode = GlueMode::kQuadratic;
  Scalar y0{};    // source y(0)
  Scalar d2y0{};  // source y''(0)
  Scalar a{};

  /// Derivatives 0..3 of the arc at x.
  Eigen::Matrix<Scalar, 4, 1> derivatives(Scalar x) const {
    const Scalar xi = x - lo;
    Eigen::Matrix<Scalar, 4, 1> d;
    if (mode == GlueMode::kQuadratic) {
      const Scalar c = d2y0 / (Scalar(2) * a * a);
      d << y0 + c * xi * (xi - length), c * (Scalar(2) * xi - length), Scalar(2) * c, Scalar(0);
    } else {
      const Scalar zeta = xi - length / Scalar(2);
      const Scalar cubic = d2y0 / (Scalar(3) * a * a * length);
      const Scalar linear = -d2y0 * length / (Scalar(12) * a * a) + Scalar(2) * y0 / length;
      d << zeta * (cubic * zeta * zeta + linear), Scalar(3) * cubic * zeta * zeta + linear,
          Scalar(6) * cubic * zeta, Scalar(6) * cubic;
    }
    return Scalar(sign) * d;
  }
};

template <typename Scalar = double>
struct GluedFunction {
  Trajectory<Scalar> samples;  // on the generation G+1 grid, lambda = target
  Scalar target_lambda{};
  std::vector<int> copy_signs;
  std::vector<GapFiller<Scalar>> fillers;
  Eigenpair<Scalar> source;
  GlueMode mode = GlueMode::kQuadratic;
  int zero_count = 0;
  /// Largest junction jump in derivatives 0..2, each relative to the source's
  /// peak value of that derivative.
  Scalar junction_mismatch{};
};

namespace detail {

template <typename Scalar>
Eigen::Matrix<Scalar, 4, 1> classical(const Trajectory<Scalar>& traj, std::size_t i) {
  const auto s = traj.state(i);
  return {s.y(), s.dy(), s.d2y(), traj.third_derivative(i)};
}

}  // namespace detail

/// Builds the glued function from a certified small-problem eigenpair.
/// Copy signs are fixed left to right: the gap arc takes the sign that makes
/// it continuous with the previous copy, and the next copy inherits it.
template <typename Scalar>
GluedFunction<Scalar> glue(const WeightParams<Scalar>& w, const Eigenpair<Scalar>& src, GlueMode mode,
                           Scalar junction_tol = Scalar(1e-6)) {
  const Trajectory<Scalar>& y = src.trajectory;
  if (!y.grid || !same_weight(w, y.grid->weight)) throw ConfigMismatch("glue: source was solved for another weight");
  if (mode == GlueMode::kQuadratic && !(src.lambda > Scalar(0)))
    throw DomainError("glue: quadratic join needs a positive source eigenvalue");

  const auto& small = *y.grid;
  const std::size_t n_small = small.size();
  const auto big = build_grid(w, small.generation + 1, small.substeps);
  const Scalar stride = w.stride(), a = w.a, b = w.b;
  const Scalar target = Scalar(w.kappa) / (a * a * a) * src.lambda;

  const Eigen::Matrix<Scalar, 4, 1> at0 = detail::classical(y, 0);
  const Eigen::Matrix<Scalar, 4, 1> at1 = detail::classical(y, n_small - 1);
  if (!(at0(0) * at0(2) < Scalar(0)))
    throw MatchingError("glue: source violates y(0) * y''(0) < 0; eigenpair is not admissible");

  Eigen::Matrix<Scalar, 4, 1> peak = Eigen::Matrix<Scalar, 4, 1>::Zero();
  for (std::size_t i = 0; i < n_small; ++i) peak = peak.cwiseMax(detail::classical(y, i).cwiseAbs());
  Eigen::Matrix<Scalar, 4, 1> unscale;  // a^j, maps big-problem derivatives to source units
  unscale << Scalar(1), a, a * a, a * a * a;

  GluedFunction<Scalar> out;
  out.target_lambda = target;
  out.source = src;
  out.mode = mode;
  out.copy_signs.push_back(1);
  Scalar mismatch = 0;
  auto record_jump = [&](const Eigen::Matrix<Scalar, 4, 1>& lhs, const Eigen::Matrix<Scalar, 4, 1>& rhs) {
    for (int j = 0; j < 3; ++j) mismatch = std::max(mismatch, std::abs(lhs(j) - rhs(j)) / peak(j));
  };
  for (int k = 1; k < w.kappa; ++k) {
    GapFiller<Scalar> f{Scalar(k) * stride - b, b, 1, mode, at0(0), at0(2), a};
    const Scalar arc_left = f.derivatives(f.lo)(0);
    const Scalar copy_left = Scalar(out.copy_signs.back()) * at1(0);
    f.sign = (arc_left * copy_left >= Scalar(0)) ? 1 : -1;
    out.copy_signs.push_back(f.derivatives(f.lo + b)(0) * at0(0) >= Scalar(0) ? 1 : -1);
    record_jump(Scalar(out.copy_signs[static_cast<std::size_t>(k - 1)]) * at1, f.derivatives(f.lo).cwiseProduct(unscale));
    record_jump(f.derivatives(f.lo + b).cwiseProduct(unscale), Scalar(out.copy_signs.back()) * at0);
    out.fillers.push_back(f);
  }
  out.junction_mismatch = mismatch;
  if (mismatch > junction_tol)
    throw MatchingError("glue: junction mismatch " + std::to_string(double(mismatch)) +
                        " exceeds tolerance; source eigenpair is inaccurate");

  Trajectory<Scalar> z;
  z.grid = big;
  z.lambda = target;
  z.states.resize(4, static_cast<Eigen::Index>(big->size()));
  const std::size_t gap_interior = static_cast<std::size_t>(small.substeps - 1);
  std::size_t node = 0;
  for (int k = 0; k < w.kappa; ++k) {
    const Scalar origin = Scalar(k) * stride;
    const Scalar sign = Scalar(out.copy_signs[static_cast<std::size_t>(k)]);
    for (std::size_t i = 0; i < n_small; ++i, ++node) {
      const Scalar x = big->nodes[node];
      if (std::abs(x - (origin + a * small.nodes[i])) > Scalar(64) * std::numeric_limits<Scalar>::epsilon())
        throw ConfigMismatch("glue: refined grid does not nest the source grid");
      const Eigen::Matrix<Scalar, 4, 1> d = sign * detail::classical(y, i).cwiseQuotient(unscale);
      z.states.col(static_cast<Eigen::Index>(node)) << d(0), d(1), d(2), d(3) - target * big->p_nodes[node] * d(0);
    }
    if (k + 1 == w.kappa) break;
    const auto& f = out.fillers[static_cast<std::size_t>(k)];
    for (std::size_t j = 0; j < gap_interior; ++j, ++node) {
      const Eigen::Matrix<Scalar, 4, 1> d = f.derivatives(big->nodes[node]);
      z.states.col(static_cast<Eigen::Index>(node)) << d(0), d(1), d(2), d(3) - target * big->p_nodes[node] * d(0);
    }
  }
  if (node != big->size()) throw ConfigMismatch("glue: node count mismatch between source and refined grids");
  out.samples = std::move(z);
  out.zero_count = count_sign_changes(out.samples);
  return out;
}

template <typename Scalar>
GluedFunction<Scalar> glue_quadratic(const WeightParams<Scalar>& w, const Eigenpair<Scalar>& src,
                                     Scalar junction_tol = Scalar(1e-6)) {
  return glue(w, src, GlueMode::kQuadratic, junction_tol);
}

template <typename Scalar>
GluedFunction<Scalar> glue_cubic(const WeightParams<Scalar>& w, const Eigenpair<Scalar>& src,
                                 Scalar junction_tol = Scalar(1e-6)) {
  return glue(w, src, GlueMode::kCubic, junction_tol);
}

/// Defect of the glued function against the big equation: each cell copy and
/// each gap arc is re-integrated from the state z has on arrival at its left
/// junction (the previous piece's end state), and the sup distance to the
/// samples is reported relative to max|z|.
template <typename Scalar>
Scalar glued_residual(const WeightParams<Scalar>& w, const GluedFunction<Scalar>& g) {
  const auto& grid = *g.samples.grid;
  if (!same_weight(w, grid.weight)) throw ConfigMismatch("glued_residual: weight mismatch");
  const Scalar lambda = g.target_lambda;
  const Scalar stride = w.stride();
  const Scalar zmax = g.samples.max_abs_y();
  Scalar defect = 0;

  // Piece boundaries on the generation-1 level, as node indices.
  std::vector<std::size_t> boundaries{0};
  for (int k = 1; k < w.kappa; ++k) {
    for (const Scalar edge : {Scalar(k) * stride - w.b, Scalar(k) * stride}) {
      const auto it = std::lower_bound(grid.nodes.begin(), grid.nodes.end(), edge - Scalar(1e-12));
      boundaries.push_back(static_cast<std::size_t>(it - grid.nodes.begin()));
    }
  }
  boundaries.push_back(grid.size() - 1);

  for (std::size_t p = 0; p + 1 < boundaries.size(); ++p) {
    const std::size_t first = boundaries[p], last = boundaries[p + 1];
    Eigen::Matrix<Scalar, 4, 1> state = g.samples.states.col(static_cast<Eigen::Index>(first));
    if (p % 2 == 0 && p > 0) {
      // Entering a cell: arrive with the arc's end state.
      const auto& f = g.fillers[p / 2 - 1];
      const Eigen::Matrix<Scalar, 4, 1> d = f.derivatives(grid.nodes[first]);
      state << d(0), d(1), d(2), d(3) - lambda * grid.p_nodes[first] * d(0);
    }
    for (std::size_t i = first; i < last; ++i) {
      detail::advance(grid, i, lambda, state);
      defect = std::max(defect, std::abs(state(0) - g.samples.y(i + 1)));
    }
  }
  return defect / zmax;
}

/// Residual of the glued function against the big problem's boundary
/// conditions. Each condition is normalized by the same combination of the
/// peak magnitudes of the derivatives it involves, so a condition with a
/// single term (alpha = 0) is not divided by itself.
template <typename Scalar>
Scalar glued_boundary_residual(const BVPConfig<Scalar>& big, const GluedFunction<Scalar>& g) {
  const auto& z = g.samples;
  Eigen::Matrix<Scalar, 4, 1> peak = Eigen::Matrix<Scalar, 4, 1>::Zero();
  for (std::size_t i = 0; i < z.size(); ++i) peak = peak.cwiseMax(detail::classical(z, i).cwiseAbs());
  const Scalar a = big.alpha, b = big.beta;
  const Scalar scale1 = peak(2) + a * peak(0) + b * peak(1), scale2 = b * peak(3) + a * peak(2);
  const auto l = detail::classical(z, 0), r = detail::classical(z, z.size() - 1);
  return std::max({std::abs(l(2) + a * l(0) - b * l(1)) / scale1, std::abs(b * l(3) - a * l(2)) / scale2,
                   std::abs(r(2) + a * r(0) + b * r(1)) / scale1, std::abs(b * r(3) + a * r(2)) / scale2});
}

template <typename Scalar = double>
struct IdentityRow {
  int n = 0;
  Scalar mu{};
  Scalar scaled_mu{};  // (kappa / a^3) mu
  int mapped_index = 0;
  Scalar lambda_mapped{};
  Scalar deviation{};  // |lambda_mapped a^3 / kappa - mu| / mu, 0 when mu = 0 = lambda
  bool flagged = false;
};

template <typename Scalar = double>
struct IdentityReport {
  GlueMode mode = GlueMode::kQuadratic;
  Scalar tolerance{};
  std::vector<IdentityRow<Scalar>> rows;
  Scalar max_deviation{};
  bool all_pass = true;
};

template <typename Scalar>
bool same_config(const BVPConfig<Scalar>& x, const BVPConfig<Scalar>& y, Scalar rel = Scalar(1e-9)) {
  auto close = [&](Scalar p, Scalar q) { return std::abs(p - q) <= rel * std::max({Scalar(1), std::abs(p), std::abs(q)}); };
  return close(x.alpha, y.alpha) && close(x.beta, y.beta);
}

/// Checks lambda_{mapped(n)} = (kappa / a^3) mu_n for every n the two tables
/// cover.
template <typename Scalar>
IdentityReport<Scalar> verify_identity(const SpectrumTable<Scalar>& big, const SpectrumTable<Scalar>& small,
                                       GlueMode mode, Scalar tolerance = Scalar(1e-3)) {
  if (!same_weight(big.weight, small.weight)) throw ConfigMismatch("verify_identity: weights differ");
  const auto [big_cfg, small_cfg] = periodicity_configs(big.weight, mode);
  if (!same_config(big.config, big_cfg) || !same_config(small.config, small_cfg))
    throw ConfigMismatch(std::string("verify_identity: boundary pair does not match the ") + to_string(mode) +
                         " relation");
  const int kappa = big.weight.kappa;
  const Scalar factor = Scalar(kappa) / (big.weight.a * big.weight.a * big.weight.a);
  IdentityReport<Scalar> report;
  report.mode = mode;
  report.tolerance = tolerance;
  for (const auto& pair : small.pairs) {
    const int m = mapped_index(kappa, pair.index, mode);
    if (m >= static_cast<int>(big.pairs.size())) break;
    IdentityRow<Scalar> row;
    row.n = pair.index;
    row.mu = pair.lambda;
    row.scaled_mu = factor * pair.lambda;
    row.mapped_index = m;
    row.lambda_mapped = big.pairs[static_cast<std::size_t>(m)].lambda;
    row.deviation = pair.lambda == Scalar(0) && row.lambda_mapped == Scalar(0)
                        ? Scalar(0)
                        : std::abs(row.lambda_mapped / factor - pair.lambda) / pair.lambda;
    row.flagged = !(row.deviation <= tolerance);
    report.max_deviation = std::max(report.max_deviation, row.deviation);
    report.all_pass = report.all_pass && !row.flagged;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace fspec
