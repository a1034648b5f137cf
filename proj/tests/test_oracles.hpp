#ifndef SOR_TEST_ORACLES_HPP
#define SOR_TEST_ORACLES_HPP

// Independent reference computations for the test suites. Nothing here calls
// into the SOR implementation paths it is used to check.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "sor/sparse_system.hpp"

namespace oracle {

using sor::DenseMatrix;
using sor::Vector;

/// 5-point Laplacian on an n x n grid, built entrywise from grid distance.
inline DenseMatrix<double> dense_poisson(Eigen::Index n) {
  const double h = 1.0 / double(n + 1);
  const double inv_h2 = 1.0 / (h * h);
  DenseMatrix<double> a = DenseMatrix<double>::Zero(n * n, n * n);
  for (Eigen::Index p = 0; p < n * n; ++p)
    for (Eigen::Index q = 0; q < n * n; ++q) {
      const auto dist = std::abs(p / n - q / n) + std::abs(p % n - q % n);
      if (dist == 0)
        a(p, q) = 4.0 * inv_h2;
      else if (dist == 1)
        a(p, q) = -inv_h2;
    }
  return a;
}

/// Random symmetric positive definite system of order `dim`: B B^T + dim I,
/// with roughly half the off-diagonal entries zeroed before symmetrizing.
inline sor::SparseSystem<double> random_spd(Eigen::Index dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution keep(0.5);
  DenseMatrix<double> b(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j)
      b(i, j) = keep(rng) ? u(rng) : 0.0;
  DenseMatrix<double> a = b * b.transpose();
  a.diagonal().array() += double(dim);

  sor::SparseSystem<double> system;
  system.matrix = a.sparseView();
  system.matrix.makeCompressed();
  system.rhs.resize(dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    system.rhs(i) = u(rng);
  return system;
}

inline Vector<double> random_vector(Eigen::Index dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector<double> x(dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    x(i) = u(rng);
  return x;
}

/// Direct sparse Cholesky solve.
inline Vector<double> direct_solve(const sor::SparseSystem<double>& system) {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(
      Eigen::SparseMatrix<double>(system.matrix));
  return ldlt.solve(system.rhs);
}

/// Spectral radius of the lexicographic SOR iteration matrix for the 5-point
/// Poisson problem (consistently ordered; Jacobi radius mu = cos(pi h)).
inline double young_sor_radius(Eigen::Index n, double omega) {
  const double mu = std::cos(std::numbers::pi / double(n + 1));
  const double disc = omega * omega * mu * mu - 4.0 * (omega - 1.0);
  if (disc <= 0.0)
    return std::abs(omega - 1.0);
  const double root = 0.5 * (omega * mu + std::sqrt(disc));
  return std::max(root * root, std::abs(omega - 1.0));
}

/// Eigenvalue moduli of a 2x2 matrix from its characteristic polynomial.
inline double radius_2x2(const DenseMatrix<double>& m) {
  const double tr = m.trace();
  const double det = m.determinant();
  const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4 * det));
  return std::max(std::abs(0.5 * (tr + disc)), std::abs(0.5 * (tr - disc)));
}

/// Gelfand estimate ||M^k x||^{1/k} with renormalization; valid when a single
/// dominant eigenvalue (or conjugate pair of equal modulus) exists.
inline double gelfand_radius(const DenseMatrix<double>& m, int steps) {
  Vector<double> x = Vector<double>::Ones(m.rows());
  x.normalize();
  for (int k = 0; k < steps; ++k) {
    x = m * x;
    x.normalize();
  }
  // Discard the transient by measuring growth over the second half.
  Vector<double> y = x;
  double tail = 0.0;
  for (int k = 0; k < steps; ++k) {
    y = m * y;
    const double norm = y.norm();
    tail += std::log(norm);
    y /= norm;
  }
  return std::exp(tail / steps);
}

} // namespace oracle

#endif
