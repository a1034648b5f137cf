#ifndef SOR_STENCIL_HPP
#define SOR_STENCIL_HPP

// In-place SOR sweeps on the mesh, without assembling A. Cell update:
//   u <- (1-w) u + (w/4) (u_left + u_right + u_up + u_down + h^2 f)

#include <chrono>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "sor/problem.hpp"
#include "sor/splitting.hpp"

namespace sor {

/// n x n array of h^2 f at the interior points, row-major like the mesh.
template <typename Scalar>
using ForcingTable =
    Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
ForcingTable<Scalar> scaled_forcing(const PoissonProblem<Scalar>& problem) {
  const auto& mesh = problem.mesh;
  const Eigen::Index n = mesh.size();
  const Scalar h2 = mesh.spacing() * mesh.spacing();
  ForcingTable<Scalar> table(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      table(i, j) = h2 * problem.forcing(mesh.coord(j + 1), mesh.coord(i + 1));
  return table;
}

namespace detail {

template <typename Scalar>
void check_forcing(const Mesh2D<Scalar>& mesh,
                   const ForcingTable<Scalar>& h2f) {
  if (h2f.rows() != mesh.size() || h2f.cols() != mesh.size())
    throw std::invalid_argument("forcing table does not match mesh size");
}

// Written as (keep u + c (right + up + down + h2f)) + c left with c = w/4, so
// that only the last multiply-add depends on the cell just updated.
template <typename Scalar>
inline Scalar relax(Scalar u, Scalar left, Scalar right, Scalar up,
                    Scalar down, Scalar h2f, Scalar keep, Scalar c) {
  return (keep * u + c * (((right + up) + down) + h2f)) + c * left;
}

template <typename Scalar>
inline void update_cell(Scalar* u, Eigen::Index stride, Scalar h2f,
                        Scalar keep, Scalar c) {
  *u = relax(*u, u[-1], u[1], u[-stride], u[stride], h2f, keep, c);
}

} // namespace detail

template <typename Scalar>
void sweep_lexicographic(Mesh2D<Scalar>& mesh, const ForcingTable<Scalar>& h2f,
                         Scalar omega) {
  detail::check_forcing(mesh, h2f);
  const Eigen::Index n = mesh.size();
  const Eigen::Index stride = n + 2;
  const Scalar keep = Scalar(1) - omega;
  const Scalar c = omega / Scalar(4);
  Scalar* grid = mesh.values().data();
  using Row = Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>>;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> rest(n);

  for (Eigen::Index i = 0; i < n; ++i) {
    Scalar* row = grid + (i + 1) * stride + 1;
    const Scalar* up = row - stride;
    const Scalar* down = row + stride;
    const Scalar* f = h2f.data() + i * n;
    // Everything but the left neighbour is final before the row starts.
    rest = keep * Row(row, n) +
           c * (((Row(row + 1, n) + Row(up, n)) + Row(down, n)) + Row(f, n));
    Scalar left = row[-1];
    for (Eigen::Index j = 0; j < n; ++j) {
      left = rest[j] + c * left;
      row[j] = left;
    }

    if (!Eigen::Map<const Vector<Scalar>>(row, n).allFinite())
      for (Eigen::Index j = 0; j < n; ++j)
        if (!std::isfinite(row[j]))
          throw NonFiniteError(static_cast<std::size_t>(i),
                               static_cast<std::size_t>(j));
  }
}

template <typename Scalar>
void sweep_lexicographic(Mesh2D<Scalar>& mesh,
                         const PoissonProblem<Scalar>& problem, Scalar omega) {
  sweep_lexicographic(mesh, scaled_forcing(problem), omega);
}

/// Red: (i + j) even.
enum class Color { red, black };

struct Cell {
  Eigen::Index i;
  Eigen::Index j;
};

inline std::vector<Cell> color_cells(Eigen::Index n, Color color) {
  const Eigen::Index parity = color == Color::red ? 0 : 1;
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(n * n / 2 + 1));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = (i + parity) % 2; j < n; j += 2)
      cells.push_back({i, j});
  return cells;
}

/// Updates the listed cells of one color in the given order. Same-color cells
/// only read other-color and boundary values, so any order (or concurrent
/// execution) gives the same result.
template <typename Scalar>
void sweep_color(Mesh2D<Scalar>& mesh, const ForcingTable<Scalar>& h2f,
                 Scalar omega, std::span<const Cell> cells) {
  detail::check_forcing(mesh, h2f);
  const Eigen::Index n = mesh.size();
  const Eigen::Index stride = n + 2;
  const Scalar keep = Scalar(1) - omega;
  const Scalar c = omega / Scalar(4);
  Scalar* grid = mesh.values().data();

  for (const Cell& cell : cells) {
    if (cell.i < 0 || cell.i >= n || cell.j < 0 || cell.j >= n)
      throw std::out_of_range("cell outside mesh interior");
    Scalar* u = grid + (cell.i + 1) * stride + (cell.j + 1);
    detail::update_cell(u, stride, h2f(cell.i, cell.j), keep, c);
    if (!std::isfinite(*u))
      throw NonFiniteError(static_cast<std::size_t>(cell.i),
                           static_cast<std::size_t>(cell.j));
  }
}

/// One color phase in natural order. Rows are independent within a phase and
/// run concurrently when OpenMP is enabled.
template <typename Scalar>
void sweep_color(Mesh2D<Scalar>& mesh, const ForcingTable<Scalar>& h2f,
                 Scalar omega, Color color) {
  detail::check_forcing(mesh, h2f);
  const Eigen::Index n = mesh.size();
  const Eigen::Index stride = n + 2;
  const Eigen::Index parity = color == Color::red ? 0 : 1;
  const Scalar keep = Scalar(1) - omega;
  const Scalar c = omega / Scalar(4);
  Scalar* grid = mesh.values().data();
  bool finite = true;

#pragma omp parallel for reduction(&& : finite) if (n >= 128)
  for (Eigen::Index i = 0; i < n; ++i) {
    Scalar* row = grid + (i + 1) * stride + 1;
    const Scalar* f = h2f.data() + i * n;
    for (Eigen::Index j = (i + parity) % 2; j < n; j += 2) {
      detail::update_cell(row + j, stride, f[j], keep, c);
      finite = finite && std::isfinite(row[j]);
    }
  }

  if (!finite) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = (i + parity) % 2; j < n; j += 2)
        if (!std::isfinite(mesh.at(i, j)))
          throw NonFiniteError(static_cast<std::size_t>(i),
                               static_cast<std::size_t>(j));
  }
}

template <typename Scalar>
void sweep_red_black(Mesh2D<Scalar>& mesh, const ForcingTable<Scalar>& h2f,
                     Scalar omega) {
  sweep_color(mesh, h2f, omega, Color::red);
  sweep_color(mesh, h2f, omega, Color::black);
}

template <typename Scalar>
void sweep_red_black(Mesh2D<Scalar>& mesh,
                     const PoissonProblem<Scalar>& problem, Scalar omega) {
  sweep_red_black(mesh, scaled_forcing(problem), omega);
}

/// Stencil-side residual evaluation; equals relative_residual() on the
/// assembled system up to rounding. The h^-2 factor cancels in the ratio.
template <typename Scalar>
class StencilResidual {
public:
  StencilResidual(const Mesh2D<Scalar>& mesh, const ForcingTable<Scalar>& h2f)
      : h2f_(h2f) {
    detail::check_forcing(mesh, h2f);
    const Eigen::Index n = mesh.size();
    // b scaled by h^2: forcing plus boundary neighbours.
    typename Mesh2D<Scalar>::Grid ring = mesh.values();
    ring.block(1, 1, n, n).setZero();
    const ForcingTable<Scalar> rhs = h2f + neighbour_sum(ring, n);
    rhs_norm_ = std::max(rhs.abs().maxCoeff(), std::numeric_limits<Scalar>::min());
  }

  Scalar operator()(const Mesh2D<Scalar>& mesh) const {
    const Eigen::Index n = mesh.size();
    const Eigen::Index stride = n + 2;
    const Scalar* grid = mesh.values().data();
    using Row = Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>>;
    Scalar r = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar* row = grid + (i + 1) * stride + 1;
      const Scalar cell_max =
          (Row(h2f_.data() + i * n, n) + Row(row - 1, n) + Row(row + 1, n) +
           Row(row - stride, n) + Row(row + stride, n) - Scalar(4) * Row(row, n))
              .abs()
              .template maxCoeff<Eigen::PropagateNaN>();
      if (!(cell_max <= r))  // NaN propagates
        r = cell_max;
    }
    return r / rhs_norm_;
  }

private:
  template <typename Grid>
  static ForcingTable<Scalar> neighbour_sum(const Grid& g, Eigen::Index n) {
    return g.block(0, 1, n, n) + g.block(1, 0, n, n) + g.block(1, 2, n, n) +
           g.block(2, 1, n, n);
  }

  const ForcingTable<Scalar>& h2f_;
  Scalar rhs_norm_;
};

template <typename Scalar>
Scalar stencil_relative_residual(const Mesh2D<Scalar>& mesh,
                                 const ForcingTable<Scalar>& h2f) {
  return StencilResidual<Scalar>(mesh, h2f)(mesh);
}

/// Repeats the ordering's sweep from problem.mesh until the stencil residual
/// reaches tol. Cap defaults to 100 * n^2 sweeps.
template <typename Scalar>
SolveReport<Scalar> solve_mesh(const PoissonProblem<Scalar>& problem,
                               const SorParams<Scalar>& params) {
  validate(params);
  Mesh2D<Scalar> mesh = problem.mesh;
  const ForcingTable<Scalar> h2f = scaled_forcing(problem);
  const StencilResidual<Scalar> residual_of(mesh, h2f);
  const std::size_t cap = params.sweep_cap(mesh.size() * mesh.size());

  const auto start = std::chrono::steady_clock::now();
  SolveReport<Scalar> report;
  Scalar residual = residual_of(mesh);
  report.residual_history.push_back(residual);
  if (residual <= params.tol) {
    report.converged = true;
  } else {
    try {
      while (report.iterations < cap) {
        if (params.ordering == Ordering::lexicographic)
          sweep_lexicographic(mesh, h2f, params.omega);
        else
          sweep_red_black(mesh, h2f, params.omega);
        ++report.iterations;
        residual = residual_of(mesh);
        report.residual_history.push_back(residual);
        if (!std::isfinite(residual)) {
          report.diverged = true;
          break;
        }
        if (residual <= params.tol) {
          report.converged = true;
          break;
        }
      }
    } catch (const NonFiniteError&) {
      report.diverged = true;
    }
  }
  report.wall_time = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  report.final = mesh.flatten();
  return report;
}

} // namespace sor

#endif
