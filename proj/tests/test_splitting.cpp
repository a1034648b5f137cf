#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include "sor/problem.hpp"
#include "sor/splitting.hpp"
#include "test_oracles.hpp"

using namespace sor;

namespace {

// A = [[4, 1], [1, 3]], b = A (1, 1).
SparseSystem<double> small_system() {
  DenseMatrix<double> a(2, 2);
  a << 4, 1, 1, 3;
  SparseSystem<double> s;
  s.matrix = a.sparseView();
  s.matrix.makeCompressed();
  s.rhs = Vector<double>(2);
  s.rhs << 5, 4;
  return s;
}

Vector<double> vec2(double a, double b) {
  Vector<double> v(2);
  v << a, b;
  return v;
}

bool bit_equal(const Vector<double>& a, const Vector<double>& b) {
  if (a.size() != b.size())
    return false;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (std::bit_cast<std::uint64_t>(a(i)) != std::bit_cast<std::uint64_t>(b(i)))
      return false;
  return true;
}

double zero(double, double) { return 0.0; }

} // namespace

TEST_CASE("split separates diagonal and strict parts") {
  const auto parts = split(small_system());
  CHECK(parts.diag == vec2(4, 3));
  CHECK(DenseMatrix<double>(parts.lower)(1, 0) == 1.0);
  CHECK(parts.lower.nonZeros() == 1);
  CHECK(DenseMatrix<double>(parts.upper)(0, 1) == 1.0);
  CHECK(parts.upper.nonZeros() == 1);

  const auto poisson = assemble_poisson(sine_problem<double>(4));
  const auto p = split(poisson);
  const DenseMatrix<double> rebuilt =
      DenseMatrix<double>(p.lower) + DenseMatrix<double>(p.upper) +
      DenseMatrix<double>(p.diag.asDiagonal());
  CHECK(rebuilt == DenseMatrix<double>(poisson.matrix));
}

TEST_CASE("single steps from zero") {
  const auto s = small_system();
  const auto parts = split(s);
  const Vector<double> x0 = Vector<double>::Zero(2);

  const Vector<double> sor = sor_step(parts, x0, s.rhs, 1.5);
  CHECK(sor(0) == doctest::Approx(1.875).epsilon(1e-15));
  CHECK(sor(1) == doctest::Approx(1.0625).epsilon(1e-15));

  const Vector<double> gs = gauss_seidel_step(parts, x0, s.rhs);
  CHECK(gs(0) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(gs(1) == doctest::Approx(11.0 / 12.0).epsilon(1e-15));

  const Vector<double> jac = jacobi_step(parts, x0, s.rhs);
  CHECK(jac(0) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(jac(1) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));

  CHECK_THROWS_AS(sor_step(parts, Vector<double>::Zero(3).eval(), s.rhs, 1.0),
                  std::invalid_argument);
}

TEST_CASE("the solution is a fixed point of every step") {
  const auto s = small_system();
  const auto parts = split(s);
  const Vector<double> x = vec2(1, 1);
  for (double omega : {0.5, 1.0, 1.5, 1.9})
    CHECK((sor_step(parts, x, s.rhs, omega) - x).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(gauss_seidel_step(parts, x, s.rhs) == x);
  CHECK(jacobi_step(parts, x, s.rhs) == x);
}

TEST_CASE("omega = 1 reproduces Gauss-Seidel bit for bit") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index dim = 1 + trial % 32;
    const auto s = oracle::random_spd(dim, rng);
    const auto parts = split(s);
    const Vector<double> x = oracle::random_vector(dim, rng);
    CHECK(bit_equal(sor_step(parts, x, s.rhs, 1.0),
                    gauss_seidel_step(parts, x, s.rhs)));
  }
}

TEST_CASE("non-finite iterates are reported") {
  auto s = small_system();
  s.rhs(0) = std::numeric_limits<double>::infinity();
  const auto parts = split(s);
  CHECK_THROWS_AS(sor_step(parts, Vector<double>::Zero(2).eval(), s.rhs, 1.0),
                  NonFiniteError);

  const auto report = solve(s, SorParams<double>{});
  CHECK(report.diverged);
  CHECK_FALSE(report.converged);
}

TEST_CASE("relative residual") {
  const auto s = small_system();
  CHECK(relative_residual(s, vec2(1, 1)) == 0.0);
  CHECK(relative_residual(s, Vector<double>::Zero(2).eval()) == 1.0);
  // b - A(0.5, 1) = (2, 0.5); ||b|| = 5.
  CHECK(relative_residual(s, vec2(0.5, 1)) == doctest::Approx(0.4));

  auto homogeneous = s;
  homogeneous.rhs.setZero();
  CHECK(relative_residual(homogeneous, Vector<double>::Zero(2).eval()) == 0.0);
  CHECK(relative_residual(homogeneous, vec2(1, 0)) > 1e300);

  std::mt19937_64 rng(11);
  const auto spd = oracle::random_spd(8, rng);
  const Vector<double> x = oracle::random_vector(8, rng);
  const DenseMatrix<double> a(spd.matrix);
  double num = 0, den = 0;
  for (Eigen::Index i = 0; i < 8; ++i) {
    double ax = 0;
    for (Eigen::Index j = 0; j < 8; ++j)
      ax += a(i, j) * x(j);
    num = std::max(num, std::abs(spd.rhs(i) - ax));
    den = std::max(den, std::abs(spd.rhs(i)));
  }
  CHECK(relative_residual(spd, x) == doctest::Approx(num / den).epsilon(1e-14));
}

TEST_CASE("solve") {
  SUBCASE("2x2 converges to the direct solution") {
    SorParams<double> params;
    params.tol = 1e-10;
    const auto report = solve(small_system(), params);
    REQUIRE(report.converged);
    CHECK((report.final - vec2(1, 1)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(report.residual_history.size() == report.iterations + 1);
    CHECK(report.residual_history.front() == 1.0);
    CHECK(report.final_residual() <= 1e-10);
  }
  SUBCASE("omega = 0 never moves and hits the cap") {
    SorParams<double> params;
    params.omega = 0.0;
    params.max_sweeps = 50;
    const auto report = solve(small_system(), params);
    CHECK_FALSE(report.converged);
    CHECK_FALSE(report.diverged);
    CHECK(report.iterations == 50);
    CHECK(report.final == Vector<double>::Zero(2));
  }
  SUBCASE("converged start needs no sweeps") {
    const auto report = solve(small_system(), SorParams<double>{}, vec2(1, 1));
    CHECK(report.converged);
    CHECK(report.iterations == 0);
  }
  SUBCASE("omega beyond 2 diverges or stalls") {
    SorParams<double> params;
    params.omega = 2.5;
    params.max_sweeps = 200;
    const auto report = solve(small_system(), params);
    CHECK_FALSE(report.converged);
  }
  SUBCASE("parameter validation") {
    SorParams<double> params;
    params.tol = 0.0;
    CHECK_THROWS_AS(solve(small_system(), params), std::invalid_argument);
    params = {};
    params.ordering = Ordering::red_black;
    CHECK_THROWS_AS(solve(small_system(), params), std::invalid_argument);
    params = {};
    params.omega = std::nan("");
    CHECK_THROWS_AS(solve(small_system(), params), std::invalid_argument);
  }
  SUBCASE("default cap is 100 * dim") {
    CHECK(SorParams<double>{}.sweep_cap(7) == 700);
  }
}

TEST_CASE("32x32 Poisson at omega 1.5 converges in a frozen sweep count") {
  // Frozen from the first verified build; the stencil path must agree.
  const auto system = assemble_poisson(sine_problem<double>(32));
  const auto report = solve(system, SorParams<double>{});
  CHECK(report.converged);
  CHECK(report.iterations == 668);
}

TEST_CASE("sweep equals the affine map M x + c") {
  std::mt19937_64 rng(3);
  for (Eigen::Index n : {2, 4, 8}) {
    const auto system = assemble_poisson(sine_problem<double>(n));
    const auto parts = split(system);
    for (double omega : {0.5, 1.0, 1.5, 1.9}) {
      const DenseMatrix<double> m = iteration_matrix(parts, omega);
      const Vector<double> c = iteration_offset(parts, system.rhs, omega);
      for (int k = 0; k < 100; ++k) {
        const Vector<double> x = oracle::random_vector(n * n, rng);
        const Vector<double> step = sor_step(parts, x, system.rhs, omega);
        const double scale = std::max(1.0, step.cwiseAbs().maxCoeff());
        CHECK((step - (m * x + c)).cwiseAbs().maxCoeff() <= 1e-12 * scale);
      }
    }
  }

  const auto big = split(assemble_poisson(sine_problem<double>(9)));
  CHECK_THROWS_AS(iteration_matrix(big, 1.5), std::invalid_argument);
}

TEST_CASE("spectral radius: closed forms") {
  CHECK(spectral_radius(DenseMatrix<double>::Identity(5, 5)) ==
        doctest::Approx(1.0));
  DenseMatrix<double> d = DenseMatrix<double>::Zero(2, 2);
  d.diagonal() << 0.5, -0.25;
  CHECK(spectral_radius(d) == doctest::Approx(0.5));

  DenseMatrix<double> rot(2, 2);
  rot << 0, -2, 2, 0;  // eigenvalues +-2i
  CHECK(spectral_radius(rot) == doctest::Approx(2.0));

  const auto parts = split(small_system());
  for (double omega : {0.5, 1.0, 1.2, 1.5, 1.9, 2.0, 2.5}) {
    CAPTURE(omega);
    const DenseMatrix<double> m = iteration_matrix(parts, omega);
    CHECK(spectral_radius(m) == doctest::Approx(oracle::radius_2x2(m)).epsilon(1e-8));
  }
  CHECK(spectral_radius(iteration_matrix(parts, 2.0)) >= 1.0 - 1e-8);

  CHECK_THROWS_AS(spectral_radius(DenseMatrix<double>::Zero(2, 3)),
                  std::invalid_argument);
  CHECK_THROWS_AS(spectral_radius(DenseMatrix<double>::Identity(65, 65)),
                  std::invalid_argument);
}

TEST_CASE("spectral radius matches Young's formula on Poisson") {
  for (Eigen::Index n : {3, 5, 8}) {
    const auto parts =
        split(assemble_poisson(make_poisson_problem<double>(n, zero, zero)));
    const double h = 1.0 / double(n + 1);
    const double omega_opt = 2.0 / (1.0 + std::sin(std::numbers::pi * h));
    for (double omega = 0.1; omega < 2.0; omega += 0.1) {
      // The iteration matrix is defective at the optimum; skip its neighbourhood.
      if (std::abs(omega - omega_opt) < 0.03)
        continue;
      CAPTURE(n);
      CAPTURE(omega);
      const double rho = spectral_radius(iteration_matrix(parts, omega));
      CHECK(rho == doctest::Approx(oracle::young_sor_radius(n, omega)).epsilon(1e-6));
      CHECK(rho < 1.0);
    }
    for (double omega : {2.0, 2.5})
      CHECK(spectral_radius(iteration_matrix(parts, omega)) >= 1.0 - 1e-8);
  }
}

TEST_CASE("spectral radius agrees with a Gelfand estimate below the optimum") {
  const auto parts =
      split(assemble_poisson(make_poisson_problem<double>(6, zero, zero)));
  for (double omega : {0.5, 1.0, 1.3}) {
    const DenseMatrix<double> m = iteration_matrix(parts, omega);
    CHECK(spectral_radius(m) ==
          doctest::Approx(oracle::gelfand_radius(m, 4000)).epsilon(1e-4));
  }
}

TEST_CASE("Kahan bound on random SPD systems") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index dim = 2 + trial;
    const auto parts = split(oracle::random_spd(dim, rng));
    for (double omega : {0.3, 1.0, 1.7, 2.0, 2.4}) {
      const DenseMatrix<double> m = iteration_matrix(parts, omega);
      const double rho = spectral_radius(m);
      // |det M| = |1 - w|^dim, and rho is at least the geometric mean modulus.
      const double geo = std::pow(std::abs(m.determinant()), 1.0 / double(dim));
      CHECK(geo == doctest::Approx(std::abs(1.0 - omega)).epsilon(1e-8).scale(1.0));
      CHECK(rho >= std::abs(omega - 1.0) - 1e-8);
      if (omega < 2.0)
        CHECK(rho < 1.0);
    }
  }
}

TEST_CASE("SOR decreases the A-norm error on SPD systems") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index dim = 3 + trial;
    const auto s = oracle::random_spd(dim, rng);
    const auto parts = split(s);
    const DenseMatrix<double> a(s.matrix);
    const Vector<double> exact = a.llt().solve(s.rhs);
    auto energy = [&](const Vector<double>& x) {
      const Vector<double> e = x - exact;
      return e.dot(a * e);
    };
    for (double omega : {0.4, 1.0, 1.6, 1.95}) {
      Vector<double> x = oracle::random_vector(dim, rng);
      double prev = energy(x);
      for (int k = 0; k < 5; ++k) {
        sor_step_inplace(parts, x, s.rhs, omega);
        const double now = energy(x);
        CHECK(now <= prev * (1 + 1e-12));
        prev = now;
      }
    }
  }
}
