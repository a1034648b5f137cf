#ifndef SOR_SPLITTING_HPP
#define SOR_SPLITTING_HPP

// Matrix-form SOR on A = D + L + U (D diagonal, L/U the strictly lower/upper
// parts of A itself). One sweep solves (D + wL) x' = [(1-w)D - wU] x + w b by
// forward substitution.

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

#include "sor/sparse_system.hpp"

namespace sor {

template <typename Scalar>
struct SplitParts {
  Vector<Scalar> diag;
  RowSparse<Scalar> lower;
  RowSparse<Scalar> upper;

  Eigen::Index dim() const { return diag.size(); }
};

enum class Ordering { lexicographic, red_black };

template <typename Scalar>
struct SorParams {
  Scalar omega = Scalar(1.5);
  Scalar tol = Scalar(1e-8);
  /// Defaults to 100 * dim when unset.
  std::optional<std::size_t> max_sweeps;
  Ordering ordering = Ordering::lexicographic;

  std::size_t sweep_cap(Eigen::Index dim) const {
    return max_sweeps ? *max_sweeps : 100 * static_cast<std::size_t>(dim);
  }
};

template <typename Scalar>
void validate(const SorParams<Scalar>& params) {
  if (!std::isfinite(params.omega))
    throw std::invalid_argument("omega must be finite");
  if (!(params.tol > Scalar(0)))
    throw std::invalid_argument("tol must be positive");
  if (params.max_sweeps && *params.max_sweeps < 1)
    throw std::invalid_argument("max_sweeps must be at least 1");
}

/// residual_history[0] is the residual of the starting guess; entry k is the
/// residual after sweep k.
template <typename Scalar>
struct SolveReport {
  std::size_t iterations = 0;
  std::vector<Scalar> residual_history;
  bool converged = false;
  bool diverged = false;
  double wall_time = 0.0;
  Vector<Scalar> final;

  Scalar final_residual() const {
    return residual_history.empty() ? std::numeric_limits<Scalar>::quiet_NaN()
                                    : residual_history.back();
  }
};

template <typename Scalar>
SplitParts<Scalar> split(const SparseSystem<Scalar>& system) {
  validate(system);
  const auto& a = system.matrix;
  const Eigen::Index dim = a.rows();

  SplitParts<Scalar> parts;
  parts.diag.resize(dim);
  std::vector<Eigen::Triplet<Scalar>> lower, upper;
  for (Eigen::Index row = 0; row < dim; ++row) {
    for (typename RowSparse<Scalar>::InnerIterator it(a, row); it; ++it) {
      if (it.col() < row)
        lower.emplace_back(row, it.col(), it.value());
      else if (it.col() > row)
        upper.emplace_back(row, it.col(), it.value());
      else
        parts.diag(row) = it.value();
    }
  }
  parts.lower.resize(dim, dim);
  parts.upper.resize(dim, dim);
  parts.lower.setFromTriplets(lower.begin(), lower.end());
  parts.upper.setFromTriplets(upper.begin(), upper.end());
  parts.lower.makeCompressed();
  parts.upper.makeCompressed();
  return parts;
}

namespace detail {

template <typename Scalar>
void check_dims(const SplitParts<Scalar>& parts, const Vector<Scalar>& x,
                const Vector<Scalar>& b) {
  if (x.size() != parts.dim() || b.size() != parts.dim())
    throw std::invalid_argument("vector length does not match system order");
}

// b_i - sum_{j<i} a_ij x_j - sum_{j>i} a_ij x_j with x read as-is.
template <typename Scalar>
Scalar off_diagonal_rest(const SplitParts<Scalar>& parts,
                         const Vector<Scalar>& x, const Vector<Scalar>& b,
                         Eigen::Index i) {
  Scalar sigma = b(i);
  for (typename RowSparse<Scalar>::InnerIterator it(parts.lower, i); it; ++it)
    sigma -= it.value() * x(it.col());
  for (typename RowSparse<Scalar>::InnerIterator it(parts.upper, i); it; ++it)
    sigma -= it.value() * x(it.col());
  return sigma;
}

} // namespace detail

/// In-place SOR sweep. Components are updated in ascending order so the lower
/// part reads new values and the upper part old ones.
template <typename Scalar>
void sor_step_inplace(const SplitParts<Scalar>& parts, Vector<Scalar>& x,
                      const Vector<Scalar>& b, Scalar omega) {
  detail::check_dims(parts, x, b);
  const Scalar keep = Scalar(1) - omega;
  for (Eigen::Index i = 0; i < parts.dim(); ++i) {
    const Scalar gs = detail::off_diagonal_rest(parts, x, b, i) / parts.diag(i);
    x(i) = keep * x(i) + omega * gs;
    if (!std::isfinite(x(i)))
      throw NonFiniteError(static_cast<std::size_t>(i));
  }
}

template <typename Scalar>
Vector<Scalar> sor_step(const SplitParts<Scalar>& parts, Vector<Scalar> x,
                        const Vector<Scalar>& b, Scalar omega) {
  sor_step_inplace(parts, x, b, omega);
  return x;
}

template <typename Scalar>
Vector<Scalar> gauss_seidel_step(const SplitParts<Scalar>& parts,
                                 Vector<Scalar> x, const Vector<Scalar>& b) {
  detail::check_dims(parts, x, b);
  for (Eigen::Index i = 0; i < parts.dim(); ++i) {
    x(i) = detail::off_diagonal_rest(parts, x, b, i) / parts.diag(i);
    if (!std::isfinite(x(i)))
      throw NonFiniteError(static_cast<std::size_t>(i));
  }
  return x;
}

template <typename Scalar>
Vector<Scalar> jacobi_step(const SplitParts<Scalar>& parts,
                           const Vector<Scalar>& x, const Vector<Scalar>& b) {
  detail::check_dims(parts, x, b);
  Vector<Scalar> next(x.size());
  for (Eigen::Index i = 0; i < parts.dim(); ++i) {
    next(i) = detail::off_diagonal_rest(parts, x, b, i) / parts.diag(i);
    if (!std::isfinite(next(i)))
      throw NonFiniteError(static_cast<std::size_t>(i));
  }
  return next;
}

/// ||b - A x||_inf / max(||b||_inf, smallest positive normal).
template <typename Scalar>
Scalar relative_residual(const SparseSystem<Scalar>& system,
                         const Vector<Scalar>& x) {
  if (x.size() != system.dim())
    throw std::invalid_argument("vector length does not match system order");
  const Scalar scale = std::max(system.rhs.template lpNorm<Eigen::Infinity>(),
                                std::numeric_limits<Scalar>::min());
  return (system.rhs - system.matrix * x).template lpNorm<Eigen::Infinity>() /
         scale;
}

/// Iterates SOR sweeps from x0 until the relative residual drops to tol or
/// the sweep cap is reached. A non-finite iterate stops the run with
/// `diverged` set. Only lexicographic ordering applies to the matrix form.
template <typename Scalar>
SolveReport<Scalar> solve(const SparseSystem<Scalar>& system,
                          const SorParams<Scalar>& params,
                          const Vector<Scalar>& x0) {
  validate(params);
  if (params.ordering != Ordering::lexicographic)
    throw std::invalid_argument(
        "matrix-form solve supports lexicographic ordering only");
  const auto parts = split(system);
  const std::size_t cap = params.sweep_cap(system.dim());

  const auto start = std::chrono::steady_clock::now();
  SolveReport<Scalar> report;
  report.final = x0;
  Scalar residual = relative_residual(system, report.final);
  report.residual_history.push_back(residual);
  if (residual <= params.tol) {
    report.converged = true;
  } else {
    try {
      while (report.iterations < cap) {
        sor_step_inplace(parts, report.final, system.rhs, params.omega);
        ++report.iterations;
        residual = relative_residual(system, report.final);
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
  return report;
}

template <typename Scalar>
SolveReport<Scalar> solve(const SparseSystem<Scalar>& system,
                          const SorParams<Scalar>& params) {
  return solve(system, params, Vector<Scalar>::Zero(system.dim()).eval());
}

/// Largest order accepted by the dense analysis routines.
inline constexpr Eigen::Index kDenseAnalysisCap = 64;

/// Dense M = (D + wL)^{-1} [(1-w)D - wU], so that sor_step(x) = M x + c.
template <typename Scalar>
DenseMatrix<Scalar> iteration_matrix(const SplitParts<Scalar>& parts,
                                     Scalar omega) {
  const Eigen::Index dim = parts.dim();
  if (dim > kDenseAnalysisCap)
    throw std::invalid_argument("iteration_matrix: order exceeds dense cap");

  DenseMatrix<Scalar> lhs = omega * DenseMatrix<Scalar>(parts.lower);
  lhs.diagonal() += parts.diag;
  DenseMatrix<Scalar> rhs = -omega * DenseMatrix<Scalar>(parts.upper);
  rhs.diagonal() += (Scalar(1) - omega) * parts.diag;
  return lhs.template triangularView<Eigen::Lower>().solve(rhs);
}

/// c = w (D + wL)^{-1} b, the affine part of one sweep.
template <typename Scalar>
Vector<Scalar> iteration_offset(const SplitParts<Scalar>& parts,
                                const Vector<Scalar>& b, Scalar omega) {
  if (parts.dim() > kDenseAnalysisCap)
    throw std::invalid_argument("iteration_offset: order exceeds dense cap");
  DenseMatrix<Scalar> lhs = omega * DenseMatrix<Scalar>(parts.lower);
  lhs.diagonal() += parts.diag;
  return lhs.template triangularView<Eigen::Lower>().solve(omega * b);
}

template <typename Derived>
typename Derived::RealScalar
spectral_radius(const Eigen::MatrixBase<Derived>& m) {
  using Real = typename Derived::RealScalar;
  if (m.rows() != m.cols())
    throw std::invalid_argument("spectral_radius: matrix is not square");
  if (m.rows() > kDenseAnalysisCap)
    throw std::invalid_argument("spectral_radius: order exceeds dense cap");
  if (m.rows() == 0)
    return Real(0);

  Eigen::EigenSolver<DenseMatrix<Real>> solver(m.eval(), false);
  if (solver.info() != Eigen::Success)
    throw ConvergenceError("eigenvalue iteration did not converge");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

} // namespace sor

#endif
