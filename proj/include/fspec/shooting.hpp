#pragma once

// Shooting for the boundary family
//
//   y''(0) + a y(0) - b y'(0) = b y'''(0) - a y''(0) = 0,
//   y''(1) + a y(1) + b y'(1) = b y'''(1) + a y''(1) = 0,      a >= 0, b > 0
//
// (a = alpha, b = beta). Eigenvalues are zeros of the 2x2 residual
// determinant of two left-admissible solutions, and the n-th one is
// identified by its eigenfunction having exactly n interior sign changes.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fspec/errors.hpp"
#include "fspec/measure.hpp"
#include "fspec/quasi_ode.hpp"

namespace fspec {

template <typename Scalar = double>
struct BVPConfig {
  Scalar alpha{};
  Scalar beta{1};
};

template <typename Scalar>
BVPConfig<Scalar> make_bvp(Scalar alpha, Scalar beta) {
  if (!(alpha >= Scalar(0))) throw DomainError("make_bvp: alpha must be >= 0");
  if (!(beta > Scalar(0))) throw DomainError("make_bvp: beta must be > 0");
  return {alpha, beta};
}

/// Two independent states satisfying both left boundary conditions
/// (P(0) = 0, so v(0) = y'''(0)).
template <typename Scalar>
std::pair<QuasiState<Scalar>, QuasiState<Scalar>> left_basis(const BVPConfig<Scalar>& cfg) {
  const Scalar a = cfg.alpha, b = cfg.beta;
  return {QuasiState<Scalar>(1, 0, -a, -a * a / b), QuasiState<Scalar>(0, 1, b, a)};
}

/// Right boundary residuals (r1, r2) of an x = 1 state; P(1) = 1.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, 2, 1> right_residual(const BVPConfig<Scalar>& cfg, Scalar lambda,
                                           const Eigen::MatrixBase<Derived>& end) {
  const Scalar y = end(0), dy = end(1), d2y = end(2);
  const Scalar d3y = end(3) + lambda * y;
  return {d2y + cfg.alpha * y + cfg.beta * dy, cfg.beta * d3y + cfg.alpha * d2y};
}

/// A real number stored as sign and natural-log magnitude.
template <typename Scalar = double>
struct SignedLog {
  int sign = 0;
  Scalar log_magnitude{};

  Scalar value() const { return sign == 0 ? Scalar(0) : Scalar(sign) * std::exp(log_magnitude); }
};

namespace detail {

template <typename Scalar>
struct ShootingRecord {
  // Block at every node, expressed in the basis of the segment containing it.
  std::vector<Eigen::Matrix<Scalar, 4, 2>> blocks;
  std::vector<int> segment;
  // Triangular factor that opened each segment; factors[0] orthonormalizes (u1, u2).
  std::vector<Eigen::Matrix<Scalar, 2, 2>> factors;
};

template <typename Scalar>
struct ShootingResult {
  SignedLog<Scalar> det;
  Eigen::Matrix<Scalar, 2, 2> residual;  // rows: conditions, columns: final basis
  std::optional<ShootingRecord<Scalar>> record;
};

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> orthonormalize(Eigen::Matrix<Scalar, 4, 2>& block) {
  Eigen::Matrix<Scalar, 2, 2> r = Eigen::Matrix<Scalar, 2, 2>::Zero();
  r(0, 0) = block.col(0).norm();
  if (!(r(0, 0) > Scalar(0))) throw DomainError("shooting: degenerate solution pair");
  block.col(0) /= r(0, 0);
  for (int pass = 0; pass < 2; ++pass) {
    const Scalar proj = block.col(0).dot(block.col(1));
    block.col(1) -= proj * block.col(0);
    r(0, 1) += proj;
  }
  r(1, 1) = block.col(1).norm();
  if (!(r(1, 1) > Scalar(0))) throw DomainError("shooting: solution pair became dependent");
  block.col(1) /= r(1, 1);
  return r;
}

template <typename Scalar>
ShootingResult<Scalar> shoot(const BVPConfig<Scalar>& cfg, Scalar lambda, const Grid<Scalar>& grid,
                             std::size_t renorm_every, bool keep_record) {
  const auto [u1, u2] = left_basis(cfg);
  Eigen::Matrix<Scalar, 4, 2> block;
  block.col(0) = u1;
  block.col(1) = u2;
  ShootingResult<Scalar> out;
  if (keep_record) {
    out.record.emplace();
    out.record->blocks.reserve(grid.size());
    out.record->segment.reserve(grid.size());
  }
  Scalar log_scale = 0;
  auto renormalize = [&] {
    const Eigen::Matrix<Scalar, 2, 2> r = orthonormalize(block);
    log_scale += std::log(r(0, 0)) + std::log(r(1, 1));
    if (keep_record) out.record->factors.push_back(r);
  };
  renormalize();
  int segment = 0;
  if (keep_record) {
    out.record->blocks.push_back(block);
    out.record->segment.push_back(segment);
  }
  for (std::size_t i = 0; i < grid.intervals(); ++i) {
    advance(grid, i, lambda, block);
    if (!all_finite(block))
      throw OverflowError("char_det: overflow despite renormalization at node " + std::to_string(i + 1), i + 1);
    if (keep_record) {
      out.record->blocks.push_back(block);
      out.record->segment.push_back(segment);
    }
    if ((i + 1) % renorm_every == 0 && i + 1 < grid.intervals()) {
      renormalize();
      ++segment;
    }
  }
  out.residual.col(0) = right_residual(cfg, lambda, block.col(0));
  out.residual.col(1) = right_residual(cfg, lambda, block.col(1));
  const Scalar d = out.residual.determinant();
  out.det.sign = d > Scalar(0) ? 1 : (d < Scalar(0) ? -1 : 0);
  out.det.log_magnitude = out.det.sign == 0 ? Scalar(0) : std::log(std::abs(d)) + log_scale;
  return out;
}

}  // namespace detail

/// Characteristic determinant of the boundary problem at lambda, in sign/log
/// form. Both shooting solutions are re-orthonormalized jointly every
/// `renorm_every` grid intervals; the triangular factors carry the scale.
template <typename Scalar>
SignedLog<Scalar> char_det(const BVPConfig<Scalar>& cfg, const WeightParams<Scalar>& w, Scalar lambda,
                           const Grid<Scalar>& grid, std::size_t renorm_every = 64) {
  if (!same_weight(w, grid.weight)) throw ConfigMismatch("char_det: grid was built for a different weight");
  return detail::shoot(cfg, lambda, grid, renorm_every, false).det;
}

// ---------------------------------------------------------------------------
// Sampled functions: interpolation and sign changes.

/// y at an arbitrary x: exact cubic Taylor expansion on gaps, cubic Hermite
/// between the neighbouring nodes on cells.
template <typename Scalar>
Scalar interpolate_y(const Trajectory<Scalar>& traj, Scalar x) {
  const auto& nodes = traj.grid->nodes;
  if (x <= nodes.front()) return traj.y(0);
  if (x >= nodes.back()) return traj.y(nodes.size() - 1);
  const std::size_t i =
      static_cast<std::size_t>(std::upper_bound(nodes.begin(), nodes.end(), x) - nodes.begin()) - 1;
  const Scalar t = x - nodes[i];
  const auto s = traj.state(i);
  if (traj.grid->markers[i] == Segment::kGap) {
    const Scalar d3y = traj.third_derivative(i);
    return s.y() + t * (s.dy() + t * (s.d2y() / Scalar(2) + t * d3y / Scalar(6)));
  }
  const Scalar h = traj.grid->step(i);
  const auto e = traj.state(i + 1);
  const Scalar u = t / h;
  const Scalar h00 = (Scalar(1) + Scalar(2) * u) * (Scalar(1) - u) * (Scalar(1) - u);
  const Scalar h10 = u * (Scalar(1) - u) * (Scalar(1) - u);
  const Scalar h01 = u * u * (Scalar(3) - Scalar(2) * u);
  const Scalar h11 = u * u * (u - Scalar(1));
  return h00 * s.y() + h10 * h * s.dy() + h01 * e.y() + h11 * h * e.dy();
}

/// Interior sign-change locations of y on (0,1). Node samples are augmented
/// with the interior extrema of the exact cubic on every gap interval, so a
/// pair of crossings inside one gap step is not missed; each crossing is then
/// located by bisection on the interpolant. Samples with |y| at or below
/// `resolution * max|y|` count as zero; a zero sample flanked by equal signs
/// cannot be resolved and raises AmbiguityError.
template <typename Scalar>
std::vector<Scalar> zero_locations(const Trajectory<Scalar>& traj, Scalar resolution = Scalar(1e-12)) {
  const auto& grid = *traj.grid;
  struct Sample {
    Scalar x, y;
  };
  std::vector<Sample> samples;
  samples.reserve(traj.size() * 2);
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    samples.push_back({grid.nodes[i], traj.y(i)});
    if (grid.markers[i] != Segment::kGap) continue;
    const auto s = traj.state(i);
    const Scalar d3y = traj.third_derivative(i);
    const Scalar h = grid.step(i);
    // p'(t) = dy + d2y t + d3y t^2 / 2
    const Scalar qa = d3y / Scalar(2), qb = s.d2y(), qc = s.dy();
    Scalar roots[2];
    int nroots = 0;
    if (qa == Scalar(0)) {
      if (qb != Scalar(0)) roots[nroots++] = -qc / qb;
    } else {
      const Scalar disc = qb * qb - Scalar(4) * qa * qc;
      if (disc >= Scalar(0)) {
        const Scalar sq = std::sqrt(disc);
        const Scalar q = -(qb + (qb >= Scalar(0) ? sq : -sq)) / Scalar(2);
        if (q != Scalar(0)) roots[nroots++] = qc / q;
        roots[nroots++] = q / qa;
      }
    }
    if (nroots == 2 && roots[0] > roots[1]) std::swap(roots[0], roots[1]);
    for (int r = 0; r < nroots; ++r) {
      const Scalar t = roots[r];
      if (t > Scalar(0) && t < h)
        samples.push_back({grid.nodes[i] + t, s.y() + t * (s.dy() + t * (s.d2y() / Scalar(2) + t * d3y / Scalar(6)))});
    }
  }
  samples.push_back({grid.nodes.back(), traj.y(traj.size() - 1)});

  Scalar peak = 0;
  for (const auto& s : samples) peak = std::max(peak, std::abs(s.y));
  const Scalar tiny = resolution * peak;
  auto sign_of = [&](Scalar v) { return v > tiny ? 1 : (v < -tiny ? -1 : 0); };

  std::vector<Scalar> zeros;
  int last_sign = 0;
  Scalar last_x = 0;
  bool pending_zero = false;
  for (const auto& s : samples) {
    const int sg = sign_of(s.y);
    if (sg == 0) {
      if (last_sign != 0) pending_zero = true;
      continue;
    }
    if (last_sign != 0 && sg != last_sign) {
      Scalar lo = last_x, hi = s.x;
      const int lo_sign = last_sign;
      for (int it = 0; it < 200 && hi - lo > Scalar(4) * std::numeric_limits<Scalar>::epsilon() * hi; ++it) {
        const Scalar mid = (lo + hi) / Scalar(2);
        const int ms = sign_of(interpolate_y(traj, mid));
        if (ms == 0) {
          lo = hi = mid;
          break;
        }
        (ms == lo_sign ? lo : hi) = mid;
      }
      zeros.push_back((lo + hi) / Scalar(2));
    } else if (last_sign != 0 && pending_zero) {
      throw AmbiguityError("count_sign_changes: unresolved zero near x = " + std::to_string(double(s.x)) +
                           "; grid too coarse");
    }
    pending_zero = false;
    last_sign = sg;
    last_x = s.x;
  }
  return zeros;
}

template <typename Scalar>
int count_sign_changes(const Trajectory<Scalar>& traj, Scalar resolution = Scalar(1e-12)) {
  return static_cast<int>(zero_locations(traj, resolution).size());
}

// ---------------------------------------------------------------------------
// Eigenpairs and spectra.

template <typename Scalar = double>
struct Eigenpair {
  int index = 0;
  Scalar lambda{};
  Trajectory<Scalar> trajectory;  // normalized to max|y| = 1
  int zero_count = 0;
  /// |det| of the residual matrix of the orthonormal shooting basis divided by
  /// the product of its row norms: the sine of the angle between the rows.
  Scalar det_residual{};
  /// |Rayleigh quotient - lambda| / lambda (absolute when lambda = 0).
  Scalar rayleigh_gap{};
};

template <typename Scalar = double>
struct SolverOptions {
  int grid_generation = 10;
  int substeps = 4;
  Scalar scan_ratio = 1.15;
  Scalar lambda_min = 1e-3;
  Scalar tol = 1e-8;
  int max_rescans = 8;
  Scalar lambda_cap = 1e10;
  std::size_t renorm_every = 64;
  Scalar endpoint_floor = 1e-6;
};

template <typename Scalar = double>
struct SolverMetadata {
  int grid_generation = 0;
  int substeps = 0;
  Scalar scan_ratio{};
  Scalar lambda_min{};
  Scalar tol{};
  std::size_t renorm_every = 0;
  int rescans = 0;
  std::size_t det_evaluations = 0;
};

template <typename Scalar = double>
struct SpectrumTable {
  BVPConfig<Scalar> config;
  WeightParams<Scalar> weight;
  std::vector<Eigenpair<Scalar>> pairs;
  SolverMetadata<Scalar> meta;
  /// Every eigenvalue up to this bound is in `pairs`.
  Scalar certified_up_to{};
};

/// Ritz value of a sampled function: the boundary quadratic form over the
/// Stieltjes norm. Numerator by Simpson's rule per grid interval (exact on
/// gaps, where y'' is linear); denominator at the grid's generation.
template <typename Scalar>
Scalar rayleigh_quotient(const BVPConfig<Scalar>& cfg, const WeightParams<Scalar>& w,
                         const Trajectory<Scalar>& traj) {
  const auto& grid = *traj.grid;
  Scalar energy = 0;
  for (std::size_t i = 0; i < grid.intervals(); ++i) {
    const Scalar h = grid.step(i);
    const Scalar left = traj.state(i).d2y(), right = traj.state(i + 1).d2y();
    const Scalar from_left = left + traj.third_derivative(i) * h / Scalar(2);
    const Scalar mid = grid.markers[i] == Segment::kGap
                           ? from_left
                           : (from_left + right - traj.third_derivative(i + 1) * h / Scalar(2)) / Scalar(2);
    energy += h / Scalar(6) * (left * left + Scalar(4) * mid * mid + right * right);
  }
  const auto s0 = traj.state(0), s1 = traj.state(traj.size() - 1);
  const Scalar b0 = cfg.alpha * s0.y() - cfg.beta * s0.dy();
  const Scalar b1 = cfg.alpha * s1.y() + cfg.beta * s1.dy();
  energy += (b0 * b0 + b1 * b1) / cfg.beta;
  const Scalar mass = stieltjes_integral(
      w, [&](Scalar x) { const Scalar v = interpolate_y(traj, x); return v * v; }, grid.generation);
  if (!(mass > Scalar(1e-300)) || !(mass > Scalar(1e-24) * traj.max_abs_y() * traj.max_abs_y()))
    throw DomainError("rayleigh_quotient: function vanishes dP-almost everywhere at quadrature resolution");
  return energy / mass;
}

/// Either "all eigenvalues with index <= n" or "all eigenvalues <= lambda".
template <typename Scalar = double>
struct SpectrumCap {
  std::variant<int, Scalar> bound;

  static SpectrumCap index(int n) { return {n}; }
  static SpectrumCap lambda(Scalar value) { return {value}; }
};

/// Scans, brackets, bisects and certifies eigenvalues of one boundary
/// problem on a fixed grid. det signs are cached across rescans.
template <typename Scalar = double>
class SpectrumSolver {
 public:
  SpectrumSolver(const BVPConfig<Scalar>& cfg, const WeightParams<Scalar>& w, SolverOptions<Scalar> opts = {})
      : cfg_(make_bvp(cfg.alpha, cfg.beta)),
        weight_(w),
        opts_(opts),
        grid_(build_grid(w, opts.grid_generation, opts.substeps)) {
    if (!(opts_.scan_ratio > Scalar(1))) throw DomainError("SpectrumSolver: scan ratio must exceed 1");
    if (!(opts_.tol > Scalar(0))) throw DomainError("SpectrumSolver: tolerance must be positive");
    if (!(opts_.lambda_min > Scalar(0))) throw DomainError("SpectrumSolver: lambda_min must be positive");
    if (opts_.renorm_every < 1) throw DomainError("SpectrumSolver: renormalization cadence must be >= 1");
  }

  const GridPtr<Scalar>& grid() const { return grid_; }
  const BVPConfig<Scalar>& config() const { return cfg_; }
  const WeightParams<Scalar>& weight() const { return weight_; }
  const SolverOptions<Scalar>& options() const { return opts_; }

  int det_sign(Scalar lambda) {
    if (auto it = sign_cache_.find(lambda); it != sign_cache_.end()) return it->second;
    ++det_evaluations_;
    const int s = detail::shoot(cfg_, lambda, *grid_, opts_.renorm_every, false).det.sign;
    sign_cache_.emplace(lambda, s);
    return s;
  }

  /// Eigenfunction candidate at lambda: the null vector of the larger row of
  /// the residual matrix, mapped back through the triangular factors.
  Eigenpair<Scalar> eigenpair_at(Scalar lambda, int index) const {
    Eigenpair<Scalar> pair;
    pair.index = index;
    pair.lambda = lambda;
    if (lambda == Scalar(0) && cfg_.alpha == Scalar(0)) {
      pair.trajectory = propagate(weight_, Scalar(0), left_basis(cfg_).first, grid_);
      pair.zero_count = count_sign_changes(pair.trajectory);
      pair.det_residual = 0;
      pair.rayleigh_gap = std::abs(rayleigh_quotient(cfg_, weight_, pair.trajectory));
      return pair;
    }
    auto run = detail::shoot(cfg_, lambda, *grid_, opts_.renorm_every, true);
    const auto& rec = *run.record;
    const Eigen::Matrix<Scalar, 2, 2>& res = run.residual;
    const Scalar n0 = res.row(0).norm(), n1 = res.row(1).norm();
    const int row = n0 >= n1 ? 0 : 1;
    Eigen::Matrix<Scalar, 2, 1> coeff(res(row, 1), -res(row, 0));
    coeff.normalize();
    pair.det_residual = (n0 > 0 && n1 > 0) ? std::abs(res.determinant()) / (n0 * n1) : Scalar(0);

    Trajectory<Scalar> traj;
    traj.grid = grid_;
    traj.lambda = lambda;
    traj.states.resize(4, static_cast<Eigen::Index>(grid_->size()));
    int segment = rec.segment.back();
    for (std::size_t i = grid_->size(); i-- > 0;) {
      while (rec.segment[i] < segment) {
        coeff = rec.factors[static_cast<std::size_t>(segment)].template triangularView<Eigen::Upper>().solve(coeff);
        --segment;
      }
      traj.states.col(static_cast<Eigen::Index>(i)) = rec.blocks[i] * coeff;
    }
    Scalar peak_index_value = 0;
    for (Eigen::Index i = 0; i < traj.states.cols(); ++i)
      if (std::abs(traj.states(0, i)) > std::abs(peak_index_value)) peak_index_value = traj.states(0, i);
    if (peak_index_value == Scalar(0)) throw CertificationError("eigenpair_at: eigenfunction vanishes identically");
    // Normalize to max|y| = 1 with a positive value at x = 0.
    const Scalar scale = std::abs(peak_index_value) * (traj.states(0, 0) < Scalar(0) ? Scalar(-1) : Scalar(1));
    traj.states /= scale;
    traj.scale_log = std::log(std::abs(scale));
    pair.trajectory = std::move(traj);
    pair.zero_count = count_sign_changes(pair.trajectory);
    const Scalar rq = rayleigh_quotient(cfg_, weight_, pair.trajectory);
    pair.rayleigh_gap = std::abs(rq - lambda) / lambda;
    return pair;
  }

  /// Number of eigenvalues <= lambda (lambda not itself an eigenvalue). The
  /// candidate eigenfunction at lambda has either N(lambda) - 1 or N(lambda)
  /// sign changes; the parity of N(lambda) is fixed by the number of sign flips
  /// of the characteristic determinant since lambda_min.
  int eigenvalue_count(Scalar lambda) {
    const int offset = cfg_.alpha == Scalar(0) ? 1 : 0;
    if (lambda < opts_.lambda_min) return lambda >= Scalar(0) ? offset : 0;
    const int reference = det_sign(opts_.lambda_min);
    const int here = det_sign(lambda);
    if (here == 0) throw DomainError("eigenvalue_count: lambda is an eigenvalue to machine precision");
    const int c = eigenpair_at(lambda, -1).zero_count;
    const int parity = (offset + (here != reference ? 1 : 0)) % 2;
    return c % 2 == parity ? c : c + 1;
  }

  SpectrumTable<Scalar> solve(const SpectrumCap<Scalar>& cap) {
    const int offset = cfg_.alpha == Scalar(0) ? 1 : 0;
    std::optional<int> max_index;
    std::optional<Scalar> lambda_bound;
    if (std::holds_alternative<int>(cap.bound)) {
      max_index = std::get<int>(cap.bound);
      if (*max_index < 0) throw DomainError("spectrum: index cap must be >= 0");
    } else {
      lambda_bound = std::get<Scalar>(cap.bound);
      if (!(*lambda_bound >= Scalar(0)) || !std::isfinite(double(*lambda_bound)))
        throw DomainError("spectrum: lambda cap must be finite and >= 0");
      if (*lambda_bound > opts_.lambda_cap) throw CapExceeded("spectrum: lambda cap beyond the solver's scan cap");
    }
    if (eigenpair_at(opts_.lambda_min, -1).zero_count > offset)
      throw CertificationError("spectrum: lambda_min lies above the first positive eigenvalue");

    // Roots in increasing order, each with its eigenfunction.
    std::map<Scalar, Eigenpair<Scalar>> roots;
    int rescans = 0;

    // Geometric scan of [lo, hi]; every sign change is bisected to a root.
    auto scan = [&](Scalar lo, Scalar hi, Scalar ratio) {
      Scalar a = lo;
      int sa = det_sign(a);
      for (int step = 1;; ++step) {
        Scalar b = lo * std::pow(ratio, Scalar(step));
        if (b > hi) b = hi;
        if (b > opts_.lambda_cap)
          throw BracketExhausted("spectrum: scan reached lambda cap " + std::to_string(double(opts_.lambda_cap)) +
                                 " before the requested eigenvalues were bracketed");
        const int sb = det_sign(b);
        if (sa != 0 && sb != 0 && sa != sb) {
          const Scalar root = bisect(a, b, sa);
          if (!roots.count(root)) roots.emplace(root, eigenpair_at(root, -1));
        }
        a = b;
        if (sb != 0) sa = sb;
        if (b >= hi) break;
      }
    };

    // Index mode: step out geometrically until the counting function passes
    // the requested index, then treat that point as a lambda cap.
    Scalar scan_to = lambda_bound ? *lambda_bound : opts_.lambda_min;
    if (max_index) {
      while (eigenvalue_count(scan_to) <= *max_index) {
        scan_to *= opts_.scan_ratio;
        if (scan_to > opts_.lambda_cap)
          throw BracketExhausted("spectrum: scan reached lambda cap " + std::to_string(double(opts_.lambda_cap)) +
                                 " before the requested eigenvalues were bracketed");
      }
    }
    if (scan_to > opts_.lambda_min) scan(opts_.lambda_min, scan_to, opts_.scan_ratio);

    // Certification: oscillation counts must run offset, offset+1, ... A jump
    // means eigenvalues were stepped over between two found roots (or, in
    // lambda-cap mode, between the last root and the cap); such stretches are
    // rescanned with the square-rooted ratio.
    const Scalar pad = Scalar(16) * opts_.tol;
    for (;;) {
      std::vector<std::pair<Scalar, Scalar>> holes;
      int expected = offset;
      Scalar previous = opts_.lambda_min;
      for (const auto& [lambda, pair] : roots) {
        if (lambda > scan_to) break;
        if (pair.zero_count < expected)
          throw CertificationError("spectrum: oscillation counts are not increasing near lambda = " +
                                   std::to_string(double(lambda)) + "; grid too coarse for this range");
        if (pair.zero_count > expected) holes.emplace_back(previous, lambda * (Scalar(1) - pad));
        expected = pair.zero_count + 1;
        previous = lambda * (Scalar(1) + pad);
      }
      if (scan_to > opts_.lambda_min && previous < scan_to && eigenvalue_count(scan_to) > expected)
        holes.emplace_back(previous, scan_to);
      if (holes.empty()) break;
      if (++rescans > opts_.max_rescans)
        throw CertificationError("spectrum: eigenvalues missing below lambda = " +
                                 std::to_string(double(holes.front().second)) + " after " +
                                 std::to_string(opts_.max_rescans) + " rescans");
      const Scalar ratio = std::pow(opts_.scan_ratio, std::pow(Scalar(0.5), Scalar(rescans)));
      for (const auto& [lo, hi] : holes) scan(lo, hi, ratio);
    }

    SpectrumTable<Scalar> table;
    table.config = cfg_;
    table.weight = weight_;
    if (offset == 1 && !(lambda_bound && *lambda_bound < Scalar(0))) table.pairs.push_back(eigenpair_at(Scalar(0), 0));
    for (auto& [lambda, pair] : roots) {
      pair.index = static_cast<int>(table.pairs.size());
      if (max_index && pair.index > *max_index) break;
      if (lambda_bound && lambda > *lambda_bound) break;
      table.pairs.push_back(pair);
    }
    for (const auto& pair : table.pairs) certify(pair);
    table.certified_up_to = lambda_bound ? *lambda_bound : table.pairs.back().lambda;
    table.meta = {opts_.grid_generation, opts_.substeps, opts_.scan_ratio, opts_.lambda_min,
                  opts_.tol,             opts_.renorm_every, rescans,       det_evaluations_};
    return table;
  }

  /// Index, sign-change and endpoint checks for one eigenpair.
  void certify(const Eigenpair<Scalar>& pair) const {
    if (pair.zero_count != pair.index)
      throw CertificationError("certify: eigenpair " + std::to_string(pair.index) + " has " +
                               std::to_string(pair.zero_count) + " sign changes");
    const Scalar peak = pair.trajectory.max_abs_y();
    const Scalar y0 = std::abs(pair.trajectory.y(0));
    const Scalar y1 = std::abs(pair.trajectory.y(pair.trajectory.size() - 1));
    if (y0 < opts_.endpoint_floor * peak || y1 < opts_.endpoint_floor * peak)
      throw CertificationError("certify: eigenfunction " + std::to_string(pair.index) + " vanishes at an endpoint");
  }

 private:
  Scalar bisect(Scalar lo, Scalar hi, int lo_sign) {
    while (hi - lo > opts_.tol * hi) {
      const Scalar mid = (lo + hi) / Scalar(2);
      const int s = det_sign(mid);
      if (s == 0) return mid;
      (s == lo_sign ? lo : hi) = mid;
    }
    return (lo + hi) / Scalar(2);
  }

  BVPConfig<Scalar> cfg_;
  WeightParams<Scalar> weight_;
  SolverOptions<Scalar> opts_;
  GridPtr<Scalar> grid_;
  std::map<Scalar, int> sign_cache_;
  std::size_t det_evaluations_ = 0;
};

template <typename Scalar>
SpectrumTable<Scalar> spectrum(const BVPConfig<Scalar>& cfg, const WeightParams<Scalar>& w,
                               const SpectrumCap<Scalar>& cap, const SolverOptions<Scalar>& opts = {}) {
  SpectrumSolver<Scalar> solver(cfg, w, opts);
  return solver.solve(cap);
}

/// The n-th eigenpair, certified by its oscillation count. If certification
/// fails on the default scan ratio the whole scan is repeated with the
/// square-rooted ratio.
template <typename Scalar>
Eigenpair<Scalar> locate_eigenvalue(const BVPConfig<Scalar>& cfg, const WeightParams<Scalar>& w, int n,
                                    SolverOptions<Scalar> opts = {}) {
  if (n < 0) throw DomainError("locate_eigenvalue: index must be >= 0");
  for (int attempt = 0;; ++attempt) {
    try {
      return spectrum(cfg, w, SpectrumCap<Scalar>::index(n), opts).pairs.at(static_cast<std::size_t>(n));
    } catch (const CertificationError&) {
      if (attempt >= 2) throw;
      opts.scan_ratio = std::sqrt(opts.scan_ratio);
    }
  }
}

}  // namespace fspec
