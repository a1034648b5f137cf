#ifndef SOR_SPARSE_SYSTEM_HPP
#define SOR_SPARSE_SYSTEM_HPP

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "sor/errors.hpp"

namespace sor {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Compressed-row storage; inner (column) indices are kept sorted.
template <typename Scalar>
using RowSparse = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

/// Square system A x = b.
template <typename Scalar>
struct SparseSystem {
  RowSparse<Scalar> matrix;
  Vector<Scalar> rhs;

  Eigen::Index dim() const { return matrix.rows(); }
};

/// Throws InvalidSystem on the first row that is missing its diagonal, has a
/// zero diagonal or has non-increasing column indices. Also checks shapes.
template <typename Scalar>
void validate(const SparseSystem<Scalar>& system) {
  const auto& a = system.matrix;
  if (a.rows() != a.cols())
    throw std::invalid_argument("system matrix is not square");
  if (system.rhs.size() != a.rows())
    throw std::invalid_argument("rhs length does not match matrix order");
  if (!a.isCompressed())
    throw std::invalid_argument("system matrix must be compressed");

  for (Eigen::Index row = 0; row < a.outerSize(); ++row) {
    bool has_diag = false;
    Eigen::Index prev = -1;
    for (typename RowSparse<Scalar>::InnerIterator it(a, row); it; ++it) {
      if (it.col() <= prev)
        throw InvalidSystem(static_cast<std::size_t>(row),
                            "column indices not strictly increasing");
      prev = it.col();
      if (it.col() == row) {
        if (it.value() == Scalar(0))
          throw InvalidSystem(static_cast<std::size_t>(row), "zero diagonal");
        has_diag = true;
      }
    }
    if (!has_diag)
      throw InvalidSystem(static_cast<std::size_t>(row), "missing diagonal");
  }
}

} // namespace sor

#endif
