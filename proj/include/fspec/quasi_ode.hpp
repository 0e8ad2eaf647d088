#pragma once

// First-order quasi-derivative form of y'''' = lambda * y dP:
//
//   y' = dy,  dy' = d2y,  d2y' = v + lambda P y,  v' = -lambda P dy,
//
// with v = y''' - lambda P y. The system matrix is trace-free, so the
// fundamental matrix has unit determinant.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fspec/errors.hpp"
#include "fspec/measure.hpp"

namespace fspec {

/// (y, y', y'', v) with v = y''' - lambda P y.
template <typename Scalar = double>
class QuasiState : public Eigen::Matrix<Scalar, 4, 1> {
  using Base = Eigen::Matrix<Scalar, 4, 1>;

 public:
  QuasiState() : Base(Base::Zero()) {}
  QuasiState(Scalar y, Scalar dy, Scalar d2y, Scalar v) : Base(y, dy, d2y, v) {}
  template <typename OtherDerived>
  QuasiState(const Eigen::MatrixBase<OtherDerived>& other) : Base(other) {}
  template <typename OtherDerived>
  QuasiState& operator=(const Eigen::MatrixBase<OtherDerived>& other) {
    Base::operator=(other);
    return *this;
  }

  Scalar y() const { return (*this)(0); }
  Scalar dy() const { return (*this)(1); }
  Scalar d2y() const { return (*this)(2); }
  Scalar v() const { return (*this)(3); }

  /// Classical y''' given the weight value P(x) at the state's location.
  Scalar third_derivative(Scalar lambda, Scalar p) const { return v() + lambda * p * y(); }
};

enum class Segment : std::uint8_t { kCell, kGap };

/// Integration grid: every cell/gap boundary of one generation, each
/// elementary interval split into `substeps` equal steps. P is tabulated at
/// nodes and interval midpoints.
template <typename Scalar = double>
struct Grid {
  WeightParams<Scalar> weight;
  int generation = 0;
  int substeps = 1;
  std::vector<Scalar> nodes;
  std::vector<Segment> markers;  // one per interval
  std::vector<Scalar> p_nodes;
  std::vector<Scalar> p_mid;

  std::size_t size() const { return nodes.size(); }
  std::size_t intervals() const { return markers.size(); }
  Scalar step(std::size_t i) const { return nodes[i + 1] - nodes[i]; }
};

template <typename Scalar = double>
using GridPtr = std::shared_ptr<const Grid<Scalar>>;

inline constexpr std::size_t kDefaultMaxNodes = std::size_t(1) << 24;

template <typename Scalar>
GridPtr<Scalar> build_grid(const WeightParams<Scalar>& w, int generation, int substeps,
                           std::size_t max_nodes = kDefaultMaxNodes) {
  if (generation < 1) throw DomainError("build_grid: generation must be >= 1");
  if (substeps < 1) throw DomainError("build_grid: substeps must be >= 1");
  const std::size_t cells = detail::checked_cell_count<Scalar>(w.kappa, generation, max_nodes);
  const std::size_t node_count = (2 * cells - 1) * static_cast<std::size_t>(substeps) + 1;
  if (node_count > max_nodes) throw ResourceError("build_grid: node count exceeds the configured cap");

  auto grid = std::make_shared<Grid<Scalar>>();
  grid->weight = w;
  grid->generation = generation;
  grid->substeps = substeps;
  grid->nodes.reserve(node_count);
  grid->markers.reserve(node_count - 1);

  Scalar mass_denominator = 1;
  for (int i = 0; i < generation; ++i) mass_denominator *= Scalar(w.kappa);

  // Elementary boundaries in order: cell0.lo, cell0.hi, cell1.lo, ...
  std::vector<Scalar> boundaries;
  bool exact_nodes = false;
  if (auto exact = detail::exact_cells(w, generation)) {
    const auto& [lefts, length] = *exact;
    std::vector<Rational> bounds;
    bounds.reserve(2 * lefts.size());
    exact_nodes = true;
    for (const Rational& left : lefts) {
      const auto right = add(left, length);
      if (!right) {
        exact_nodes = false;
        break;
      }
      bounds.push_back(left);
      bounds.push_back(*right);
    }
    if (exact_nodes) {
      for (std::size_t e = 0; e + 1 < bounds.size() && exact_nodes; ++e) {
        const auto width = sub(bounds[e + 1], bounds[e]);
        if (!width) {
          exact_nodes = false;
          break;
        }
        for (int j = 0; j < substeps; ++j) {
          const auto offset = mul(*width, Rational{j, substeps});
          const auto x = offset ? add(bounds[e], *offset) : std::nullopt;
          if (!x) {
            exact_nodes = false;
            break;
          }
          grid->nodes.push_back(x->template to<Scalar>());
        }
      }
      if (exact_nodes) grid->nodes.push_back(Scalar(1));
    }
  }
  if (!exact_nodes) {
    grid->nodes.clear();
    auto [lefts, length] = detail::float_cells(w, generation);
    for (std::size_t c = 0; c < lefts.size(); ++c) {
      boundaries.push_back(lefts[c]);
      boundaries.push_back(c + 1 == lefts.size() ? Scalar(1) : lefts[c] + length);
    }
    for (std::size_t e = 0; e + 1 < boundaries.size(); ++e)
      for (int j = 0; j < substeps; ++j)
        grid->nodes.push_back(boundaries[e] + (boundaries[e + 1] - boundaries[e]) * Scalar(j) / Scalar(substeps));
    grid->nodes.push_back(Scalar(1));
  }

  const std::size_t elementary = 2 * cells - 1;
  grid->p_nodes.resize(grid->nodes.size());
  grid->p_mid.resize(grid->nodes.size() - 1);
  for (std::size_t e = 0; e < elementary; ++e) {
    const bool is_cell = e % 2 == 0;
    const std::size_t cell_index = e / 2;
    for (int j = 0; j < substeps; ++j) {
      const std::size_t i = e * static_cast<std::size_t>(substeps) + static_cast<std::size_t>(j);
      grid->markers.push_back(is_cell ? Segment::kCell : Segment::kGap);
      if (is_cell) {
        grid->p_nodes[i] = j == 0 ? Scalar(cell_index) / mass_denominator : p_eval(w, grid->nodes[i]);
        const Scalar mid = (grid->nodes[i] + grid->nodes[i + 1]) / Scalar(2);
        grid->p_mid[i] = p_eval(w, mid);
      } else {
        const Scalar level_value = Scalar(cell_index + 1) / mass_denominator;
        grid->p_nodes[i] = level_value;
        grid->p_mid[i] = level_value;
      }
    }
  }
  grid->p_nodes.back() = Scalar(1);
  return grid;
}

/// Derivative of the quasi-state at x.
template <typename Scalar>
QuasiState<Scalar> system_rhs(const WeightParams<Scalar>& w, Scalar lambda, Scalar x, const QuasiState<Scalar>& s) {
  const Scalar p = p_eval(w, x);
  return QuasiState<Scalar>(s.dy(), s.d2y(), s.v() + lambda * p * s.y(), -lambda * p * s.dy());
}

namespace detail {

template <typename Derived>
auto apply_system(const Eigen::MatrixBase<Derived>& y, typename Derived::Scalar lambda_p) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, 4, Derived::ColsAtCompileTime> out(4, y.cols());
  out.row(0) = y.row(1);
  out.row(1) = y.row(2);
  out.row(2) = y.row(3) + lambda_p * y.row(0);
  out.row(3) = -lambda_p * y.row(1);
  return out;
}

/// Advances every column of `block` across grid interval i: classical RK4 on
/// cells, the exact cubic update on gaps (P constant there, so y'''' = 0).
template <typename Scalar, int Cols>
void advance(const Grid<Scalar>& grid, std::size_t i, Scalar lambda, Eigen::Matrix<Scalar, 4, Cols>& block) {
  const Scalar h = grid.step(i);
  if (grid.markers[i] == Segment::kGap) {
    const Scalar lp = lambda * grid.p_nodes[i];
    const Scalar h2 = h * h / Scalar(2);
    const Scalar h3 = h * h * h / Scalar(6);
    for (Eigen::Index c = 0; c < block.cols(); ++c) {
      const Scalar y = block(0, c), dy = block(1, c), d2y = block(2, c);
      const Scalar d3y = block(3, c) + lp * y;
      const Scalar delta = dy * h + d2y * h2 + d3y * h3;
      block(0, c) = y + delta;
      block(1, c) = dy + d2y * h + d3y * h2;
      block(2, c) = d2y + d3y * h;
      block(3, c) -= lp * delta;
    }
    return;
  }
  const Scalar l0 = lambda * grid.p_nodes[i];
  const Scalar lm = lambda * grid.p_mid[i];
  const Scalar l1 = lambda * grid.p_nodes[i + 1];
  const Scalar half = h / Scalar(2);
  const Eigen::Matrix<Scalar, 4, Cols> k1 = apply_system(block, l0);
  const Eigen::Matrix<Scalar, 4, Cols> k2 = apply_system(block + half * k1, lm);
  const Eigen::Matrix<Scalar, 4, Cols> k3 = apply_system(block + half * k2, lm);
  const Eigen::Matrix<Scalar, 4, Cols> k4 = apply_system(block + h * k3, l1);
  block += (h / Scalar(6)) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.array().isFinite().all();
}

}  // namespace detail

/// Sampled evolution of one solution on a grid.
template <typename Scalar = double>
struct Trajectory {
  GridPtr<Scalar> grid;
  Eigen::Matrix<Scalar, 4, Eigen::Dynamic> states;
  Scalar lambda{};
  /// Natural log of the factor by which the stored states were divided.
  Scalar scale_log{};

  std::size_t size() const { return static_cast<std::size_t>(states.cols()); }
  QuasiState<Scalar> state(std::size_t i) const { return states.col(static_cast<Eigen::Index>(i)); }
  Scalar x(std::size_t i) const { return grid->nodes[i]; }
  Scalar y(std::size_t i) const { return states(0, static_cast<Eigen::Index>(i)); }
  Scalar third_derivative(std::size_t i) const { return state(i).third_derivative(lambda, grid->p_nodes[i]); }
  Scalar max_abs_y() const { return states.row(0).cwiseAbs().maxCoeff(); }
};

template <typename Scalar>
Trajectory<Scalar> propagate(const WeightParams<Scalar>& w, Scalar lambda, const QuasiState<Scalar>& s0,
                             const GridPtr<Scalar>& grid) {
  if (!grid || grid->size() < 2) throw DomainError("propagate: invalid grid");
  if (!same_weight(w, grid->weight)) throw ConfigMismatch("propagate: grid was built for a different weight");
  Trajectory<Scalar> traj;
  traj.grid = grid;
  traj.lambda = lambda;
  traj.states.resize(4, static_cast<Eigen::Index>(grid->size()));
  Eigen::Matrix<Scalar, 4, 1> current = s0;
  traj.states.col(0) = current;
  for (std::size_t i = 0; i < grid->intervals(); ++i) {
    detail::advance(*grid, i, lambda, current);
    if (!detail::all_finite(current))
      throw OverflowError("propagate: non-finite state at node " + std::to_string(i + 1), i + 1);
    traj.states.col(static_cast<Eigen::Index>(i + 1)) = current;
  }
  return traj;
}

/// Determinant of the end-state matrix of the four canonical unit solutions.
/// The block is re-orthonormalized every `renorm_every` intervals and the
/// determinant accumulated as a product of triangular factors, so the result
/// stays accurate when the solutions span many orders of magnitude.
template <typename Scalar>
Scalar fundamental_determinant(const WeightParams<Scalar>& w, Scalar lambda, const Grid<Scalar>& grid,
                               std::size_t renorm_every = 64) {
  if (!same_weight(w, grid.weight)) throw ConfigMismatch("fundamental_determinant: weight mismatch");
  Eigen::Matrix<Scalar, 4, 4> block = Eigen::Matrix<Scalar, 4, 4>::Identity();
  Scalar log_det = 0;
  int sign = 1;
  auto reorthonormalize = [&] {
    Eigen::HouseholderQR<Eigen::Matrix<Scalar, 4, 4>> qr(block);
    const Eigen::Matrix<Scalar, 4, 4> r = qr.matrixQR().template triangularView<Eigen::Upper>();
    Eigen::Matrix<Scalar, 4, 4> q = qr.householderQ();
    for (int k = 0; k < 4; ++k) {
      // Fold the sign of each diagonal entry into Q so R has a positive diagonal.
      if (r(k, k) < Scalar(0)) q.col(k) = -q.col(k);
      log_det += std::log(std::abs(r(k, k)));
    }
    block = q;
  };
  for (std::size_t i = 0; i < grid.intervals(); ++i) {
    detail::advance(grid, i, lambda, block);
    if (!detail::all_finite(block)) throw OverflowError("fundamental_determinant: non-finite state", i + 1);
    if ((i + 1) % renorm_every == 0) reorthonormalize();
  }
  const Scalar det_q = block.determinant();
  if (det_q < Scalar(0)) sign = -sign;
  return Scalar(sign) * std::abs(det_q) * std::exp(log_det);
}

}  // namespace fspec
