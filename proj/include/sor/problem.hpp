#ifndef SOR_PROBLEM_HPP
#define SOR_PROBLEM_HPP

// Discrete 2D Poisson model problem -lap(u) = f on the unit square with
// Dirichlet data, 5-point stencil, row-major (lexicographic) unknown order.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sor/sparse_system.hpp"

namespace sor {

template <typename Scalar>
using Field2D = std::function<Scalar(Scalar, Scalar)>;

/// Square grid of n x n unknowns surrounded by a Dirichlet ring.
///
/// Values live in an (n+2) x (n+2) row-major array; row r, column c sits at
/// (x, y) = (c h, r h). Interior unknown (i, j), 0 <= i, j < n, is grid entry
/// (i+1, j+1) and has flat index i*n + j. Sweeps only ever write the interior.
template <typename Scalar>
class Mesh2D {
public:
  using Grid =
      Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  explicit Mesh2D(Eigen::Index n) : n_(n) {
    if (n < 1)
      throw std::invalid_argument("mesh needs at least one interior point");
    values_ = Grid::Zero(n + 2, n + 2);
  }

  Eigen::Index size() const { return n_; }
  Scalar spacing() const { return Scalar(1) / Scalar(n_ + 1); }
  Scalar coord(Eigen::Index grid_index) const {
    return Scalar(grid_index) * spacing();
  }

  const Grid& values() const { return values_; }
  Grid& values() { return values_; }

  auto interior() { return values_.block(1, 1, n_, n_); }
  auto interior() const { return values_.block(1, 1, n_, n_); }

  Scalar& at(Eigen::Index i, Eigen::Index j) { return values_(i + 1, j + 1); }
  Scalar at(Eigen::Index i, Eigen::Index j) const {
    return values_(i + 1, j + 1);
  }

  /// Fills the boundary ring from g(x, y); the interior is left untouched.
  void set_boundary(const Field2D<Scalar>& g) {
    const Eigen::Index last = n_ + 1;
    for (Eigen::Index k = 0; k <= last; ++k) {
      values_(0, k) = g(coord(k), Scalar(0));
      values_(last, k) = g(coord(k), Scalar(1));
      values_(k, 0) = g(Scalar(0), coord(k));
      values_(k, last) = g(Scalar(1), coord(k));
    }
  }

  Vector<Scalar> flatten() const {
    Vector<Scalar> out(n_ * n_);
    for (Eigen::Index i = 0; i < n_; ++i)
      for (Eigen::Index j = 0; j < n_; ++j)
        out(i * n_ + j) = at(i, j);
    return out;
  }

  void assign_interior(const Vector<Scalar>& flat) {
    if (flat.size() != n_ * n_)
      throw std::invalid_argument("interior vector has wrong length");
    for (Eigen::Index i = 0; i < n_; ++i)
      for (Eigen::Index j = 0; j < n_; ++j)
        at(i, j) = flat(i * n_ + j);
  }

private:
  Eigen::Index n_;
  Grid values_;
};

template <typename Scalar>
struct PoissonProblem {
  Mesh2D<Scalar> mesh;
  Field2D<Scalar> forcing;
  Field2D<Scalar> dirichlet;
  std::optional<Field2D<Scalar>> exact;
};

/// Checks that a manufactured solution agrees with the forcing and boundary
/// data on a coarse 5x5 sample (continuous Laplacian by central differences).
/// Throws std::invalid_argument on mismatch.
template <typename Scalar>
void check_manufactured(const PoissonProblem<Scalar>& problem) {
  if (!problem.exact)
    return;
  const auto& u = *problem.exact;
  const Scalar step = Scalar(1e-3);
  const Scalar rel_tol = Scalar(1e-3);

  for (int a = 1; a <= 5; ++a) {
    for (int b = 1; b <= 5; ++b) {
      const Scalar x = Scalar(a) / Scalar(6);
      const Scalar y = Scalar(b) / Scalar(6);
      const Scalar lap =
          (u(x + step, y) + u(x - step, y) + u(x, y + step) + u(x, y - step) -
           Scalar(4) * u(x, y)) /
          (step * step);
      const Scalar f = problem.forcing(x, y);
      const Scalar scale = std::max({Scalar(1), std::abs(f), std::abs(lap)});
      if (std::abs(-lap - f) > rel_tol * scale)
        throw std::invalid_argument(
            "manufactured solution inconsistent with forcing");
    }
  }
  for (int a = 0; a <= 5; ++a) {
    const Scalar s = Scalar(a) / Scalar(5);
    for (auto [x, y] : {std::pair{s, Scalar(0)}, std::pair{s, Scalar(1)},
                        std::pair{Scalar(0), s}, std::pair{Scalar(1), s}}) {
      const Scalar g = problem.dirichlet(x, y);
      const Scalar scale = std::max(Scalar(1), std::abs(g));
      if (std::abs(g - u(x, y)) > Scalar(1e-9) * scale)
        throw std::invalid_argument(
            "manufactured solution inconsistent with boundary data");
    }
  }
}

/// Builds a problem whose mesh carries the boundary data and a zero interior.
template <typename Scalar>
PoissonProblem<Scalar>
make_poisson_problem(Eigen::Index n, Field2D<Scalar> forcing,
                     Field2D<Scalar> dirichlet,
                     std::optional<Field2D<Scalar>> exact = std::nullopt) {
  PoissonProblem<Scalar> problem{Mesh2D<Scalar>(n), std::move(forcing),
                                 std::move(dirichlet), std::move(exact)};
  problem.mesh.set_boundary(problem.dirichlet);
  return problem;
}

/// u = sin(pi x) sin(pi y): homogeneous Dirichlet, f = 2 pi^2 u.
template <typename Scalar>
PoissonProblem<Scalar> sine_problem(Eigen::Index n) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  auto exact = [](Scalar x, Scalar y) {
    return std::sin(pi * x) * std::sin(pi * y);
  };
  auto forcing = [](Scalar x, Scalar y) {
    return Scalar(2) * pi * pi * std::sin(pi * x) * std::sin(pi * y);
  };
  return make_poisson_problem<Scalar>(n, forcing, exact, Field2D<Scalar>(exact));
}

/// u = sin(pi x) sin(pi y) + x y + 1: same forcing as sine_problem with O(1)
/// Dirichlet data, so ||b|| is set by the boundary rather than by h^2 f.
template <typename Scalar>
PoissonProblem<Scalar> shifted_sine_problem(Eigen::Index n) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  auto exact = [](Scalar x, Scalar y) {
    return std::sin(pi * x) * std::sin(pi * y) + x * y + Scalar(1);
  };
  auto forcing = [](Scalar x, Scalar y) {
    return Scalar(2) * pi * pi * std::sin(pi * x) * std::sin(pi * y);
  };
  return make_poisson_problem<Scalar>(n, forcing, exact, Field2D<Scalar>(exact));
}

/// 5-point Laplacian: diagonal 4/h^2, grid neighbours -1/h^2, boundary
/// values folded into the right-hand side.
template <typename Scalar>
SparseSystem<Scalar> assemble_poisson(const PoissonProblem<Scalar>& problem) {
  check_manufactured(problem);

  const auto& mesh = problem.mesh;
  const Eigen::Index n = mesh.size();
  const Scalar h = mesh.spacing();
  const Scalar inv_h2 = Scalar(1) / (h * h);
  const auto& g = mesh.values();

  SparseSystem<Scalar> system;
  system.rhs.resize(n * n);
  std::vector<Eigen::Triplet<Scalar>> entries;
  entries.reserve(static_cast<std::size_t>(5 * n * n));

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index row = i * n + j;
      Scalar rhs = problem.forcing(mesh.coord(j + 1), mesh.coord(i + 1));

      // (di, dj) neighbour offsets; off-grid neighbours fold into rhs.
      const Eigen::Index offsets[4][2] = {{-1, 0}, {0, -1}, {0, 1}, {1, 0}};
      for (const auto& off : offsets) {
        const Eigen::Index ni = i + off[0];
        const Eigen::Index nj = j + off[1];
        if (ni < 0 || ni >= n || nj < 0 || nj >= n)
          rhs += g(ni + 1, nj + 1) * inv_h2;
        else
          entries.emplace_back(row, ni * n + nj, -inv_h2);
      }
      entries.emplace_back(row, row, Scalar(4) * inv_h2);
      system.rhs(row) = rhs;
    }
  }

  system.matrix.resize(n * n, n * n);
  system.matrix.setFromTriplets(entries.begin(), entries.end());
  system.matrix.makeCompressed();
  return system;
}

/// Max-norm distance between the interior and `exact` sampled on the grid.
template <typename Scalar>
Scalar manufactured_error(const Mesh2D<Scalar>& mesh,
                          const Field2D<Scalar>& exact) {
  Scalar err = 0;
  for (Eigen::Index i = 0; i < mesh.size(); ++i)
    for (Eigen::Index j = 0; j < mesh.size(); ++j)
      err = std::max(err, std::abs(mesh.at(i, j) -
                                   exact(mesh.coord(j + 1), mesh.coord(i + 1))));
  return err;
}

} // namespace sor

#endif
