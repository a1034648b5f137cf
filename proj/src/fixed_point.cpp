#include "sor/fixed_point.hpp"

#include <chrono>
#include <cmath>

namespace sor {

namespace {

using Wide = __int128;

Wide word_limit(const QFormat& f) { return Wide(1) << (f.word_bits - 1); }

std::int64_t narrow(Wide v, const QFormat& f, const char* op) {
  const Wide limit = word_limit(f);
  if (v >= limit || v <= -limit)
    throw FixedPointOverflow(std::string(op) + ": result exceeds " +
                             std::to_string(f.word_bits) + "-bit word");
  return static_cast<std::int64_t>(v);
}

// v / 2^bits, round half to even. `>>` on a negative operand is an
// arithmetic (flooring) shift in C++20.
Wide shift_round(Wide v, int bits) {
  if (bits == 0)
    return v;
  Wide q = v >> bits;
  const Wide rem = v - (q << bits);
  const Wide half = Wide(1) << (bits - 1);
  if (rem > half || (rem == half && (q & 1) != 0))
    ++q;
  return q;
}

// num / den, round half to even.
Wide div_round(Wide num, Wide den) {
  Wide q = num / den;
  Wide r = num % den;
  if (r != 0) {
    const Wide twice_r = r < 0 ? -2 * r : 2 * r;
    const Wide abs_den = den < 0 ? -den : den;
    if (twice_r > abs_den || (twice_r == abs_den && (q & 1) != 0))
      q += ((num < 0) != (den < 0)) ? -1 : 1;
  }
  return q;
}

void require_same_format(const QFixed& a, const QFixed& b) {
  if (a.format() != b.format())
    throw std::invalid_argument("Q-format mismatch between operands");
}

} // namespace

void validate(const QFormat& format) {
  if (format.word_bits < 2 || format.word_bits > 64)
    throw std::invalid_argument("word_bits must be in [2, 64]");
  if (format.frac_bits < 0 || format.frac_bits >= format.word_bits - 1)
    throw std::invalid_argument("frac_bits must be in [0, word_bits - 1)");
}

QFixed QFixed::from_raw(std::int64_t raw, QFormat format) {
  validate(format);
  return QFixed(narrow(raw, format, "from_raw"), format);
}

QFixed encode(double x, int frac_bits, int word_bits) {
  const QFormat format{frac_bits, word_bits};
  validate(format);
  if (!std::isfinite(x))
    throw FixedPointOverflow("encode: non-finite input");
  // Default FP environment rounds to nearest even.
  const double scaled = std::nearbyint(std::ldexp(x, frac_bits));
  if (std::abs(scaled) >= std::ldexp(1.0, word_bits - 1))
    throw FixedPointOverflow("encode: " + std::to_string(x) +
                             " out of range for Q format");
  return QFixed::from_raw(static_cast<std::int64_t>(scaled), format);
}

double decode(const QFixed& q) {
  return std::ldexp(static_cast<double>(q.raw()), -q.frac_bits());
}

QFixed q_add(const QFixed& a, const QFixed& b) {
  require_same_format(a, b);
  return QFixed::from_raw(
      narrow(Wide(a.raw()) + Wide(b.raw()), a.format(), "q_add"), a.format());
}

QFixed q_sub(const QFixed& a, const QFixed& b) {
  require_same_format(a, b);
  return QFixed::from_raw(
      narrow(Wide(a.raw()) - Wide(b.raw()), a.format(), "q_sub"), a.format());
}

QFixed q_mul(const QFixed& a, const QFixed& b) {
  require_same_format(a, b);
  const Wide product = Wide(a.raw()) * Wide(b.raw());
  return QFixed::from_raw(
      narrow(shift_round(product, a.frac_bits()), a.format(), "q_mul"),
      a.format());
}

QFixed q_div(const QFixed& a, const QFixed& b) {
  require_same_format(a, b);
  if (b.raw() == 0)
    throw std::domain_error("q_div: division by zero");
  const Wide num = Wide(a.raw()) * (Wide(1) << a.frac_bits());
  return QFixed::from_raw(narrow(div_round(num, b.raw()), a.format(), "q_div"),
                          a.format());
}

QFixed q_shift_right(const QFixed& a, int bits) {
  if (bits < 0 || bits >= 64)
    throw std::invalid_argument("q_shift_right: bits must be in [0, 64)");
  return QFixed::from_raw(static_cast<std::int64_t>(shift_round(a.raw(), bits)),
                          a.format());
}

FixedMesh encode_mesh(const Mesh2D<double>& mesh, QFormat format) {
  validate(format);
  FixedMesh out{mesh.size(), format,
                FixedMesh::Grid(mesh.values().rows(), mesh.values().cols())};
  for (Eigen::Index r = 0; r < out.raw.rows(); ++r)
    for (Eigen::Index c = 0; c < out.raw.cols(); ++c)
      out.raw(r, c) = encode(mesh.values()(r, c), format).raw();
  return out;
}

Mesh2D<double> decode_mesh(const FixedMesh& mesh) {
  Mesh2D<double> out(mesh.n);
  for (Eigen::Index r = 0; r < mesh.raw.rows(); ++r)
    for (Eigen::Index c = 0; c < mesh.raw.cols(); ++c)
      out.values()(r, c) = std::ldexp(static_cast<double>(mesh.raw(r, c)),
                                      -mesh.format.frac_bits);
  return out;
}

FixedMesh::Grid encode_forcing(const ForcingTable<double>& h2f,
                               QFormat format) {
  FixedMesh::Grid out(h2f.rows(), h2f.cols());
  for (Eigen::Index r = 0; r < h2f.rows(); ++r)
    for (Eigen::Index c = 0; c < h2f.cols(); ++c)
      out(r, c) = encode(h2f(r, c), format).raw();
  return out;
}

namespace {

// Raw-integer kernel for one cell; same operations and roundings as
//   keep*u + omega*((l + r + up + down + h2f) >> 2)
// expressed with q_add / q_mul / q_shift_right.
class CellKernel {
public:
  CellKernel(const FixedMesh& mesh, const FixedMesh::Grid& h2f,
             const QFixed& omega)
      : format_(mesh.format), omega_(omega.raw()) {
    if (omega.format() != mesh.format)
      throw std::invalid_argument("omega format differs from mesh format");
    if (h2f.rows() != mesh.n || h2f.cols() != mesh.n)
      throw std::invalid_argument("forcing table does not match mesh size");
    keep_ = q_sub(QFixed::from_raw(std::int64_t(1) << format_.frac_bits,
                                   format_),
                  omega)
                .raw();
  }

  void update(FixedMesh& mesh, const FixedMesh::Grid& h2f, Eigen::Index i,
              Eigen::Index j) const {
    auto& g = mesh.raw;
    const Eigen::Index r = i + 1;
    const Eigen::Index c = j + 1;
    try {
      Wide sum = g(r, c - 1);
      sum = checked(sum + g(r, c + 1));
      sum = checked(sum + g(r - 1, c));
      sum = checked(sum + g(r + 1, c));
      sum = checked(sum + h2f(i, j));
      const Wide quarter = shift_round(sum, 2);
      const Wide relaxed = checked(shift_round(Wide(keep_) * g(r, c),
                                               format_.frac_bits));
      const Wide pulled = checked(shift_round(Wide(omega_) * quarter,
                                              format_.frac_bits));
      g(r, c) = narrow(relaxed + pulled, format_, "sweep");
    } catch (const FixedPointOverflow&) {
      throw FixedPointOverflow("fixed-point overflow at cell (" +
                               std::to_string(i) + ", " + std::to_string(j) +
                               ")");
    }
  }

private:
  Wide checked(Wide v) const { return narrow(v, format_, "sweep"); }

  QFormat format_;
  std::int64_t omega_;
  std::int64_t keep_;
};

} // namespace

void sweep_fixed(FixedMesh& mesh, const FixedMesh::Grid& h2f,
                 const QFixed& omega) {
  const CellKernel kernel(mesh, h2f, omega);
  for (Eigen::Index i = 0; i < mesh.n; ++i)
    for (Eigen::Index j = 0; j < mesh.n; ++j)
      kernel.update(mesh, h2f, i, j);
}

void sweep_fixed_red_black(FixedMesh& mesh, const FixedMesh::Grid& h2f,
                           const QFixed& omega) {
  const CellKernel kernel(mesh, h2f, omega);
  for (Eigen::Index parity : {0, 1})
    for (Eigen::Index i = 0; i < mesh.n; ++i)
      for (Eigen::Index j = (i + parity) % 2; j < mesh.n; j += 2)
        kernel.update(mesh, h2f, i, j);
}

SolveReport<double> solve_mesh_fixed(const PoissonProblem<double>& problem,
                                     const SorParams<double>& params,
                                     QFormat format) {
  validate(params);
  validate(format);
  const ForcingTable<double> h2f = scaled_forcing(problem);
  const StencilResidual<double> residual_of(problem.mesh, h2f);
  const std::size_t cap =
      params.sweep_cap(problem.mesh.size() * problem.mesh.size());

  const auto start = std::chrono::steady_clock::now();
  SolveReport<double> report;
  FixedMesh mesh = encode_mesh(problem.mesh, format);
  const FixedMesh::Grid h2f_fixed = encode_forcing(h2f, format);
  const QFixed omega = encode(params.omega, format);

  double residual = residual_of(decode_mesh(mesh));
  report.residual_history.push_back(residual);
  if (residual <= params.tol) {
    report.converged = true;
  } else {
    try {
      while (report.iterations < cap) {
        if (params.ordering == Ordering::lexicographic)
          sweep_fixed(mesh, h2f_fixed, omega);
        else
          sweep_fixed_red_black(mesh, h2f_fixed, omega);
        ++report.iterations;
        residual = residual_of(decode_mesh(mesh));
        report.residual_history.push_back(residual);
        if (residual <= params.tol) {
          report.converged = true;
          break;
        }
      }
    } catch (const FixedPointOverflow&) {
      report.diverged = true;
    }
  }
  report.wall_time = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  report.final = decode_mesh(mesh).flatten();
  return report;
}

} // namespace sor
