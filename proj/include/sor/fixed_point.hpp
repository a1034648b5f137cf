#ifndef SOR_FIXED_POINT_HPP
#define SOR_FIXED_POINT_HPP

// Scaled-integer (Q-format) arithmetic: value = raw / 2^frac_bits, with raw
// held in a signed word of word_bits bits. Every rounding is
// round-to-nearest-even; anything that leaves the word range throws.

#include <cstdint>
#include <stdexcept>
#include <string>

#include "sor/problem.hpp"
#include "sor/splitting.hpp"
#include "sor/stencil.hpp"

namespace sor {

class FixedPointOverflow : public std::overflow_error {
public:
  using std::overflow_error::overflow_error;
};

struct QFormat {
  int frac_bits = 16;
  int word_bits = 64;

  friend bool operator==(const QFormat&, const QFormat&) = default;
};

/// Throws std::invalid_argument unless 2 <= word_bits <= 64 and
/// 0 <= frac_bits < word_bits - 1.
void validate(const QFormat& format);

class QFixed {
public:
  QFixed() = default;

  /// Range-checked construction from a raw integer.
  static QFixed from_raw(std::int64_t raw, QFormat format = {});

  std::int64_t raw() const noexcept { return raw_; }
  int frac_bits() const noexcept { return format_.frac_bits; }
  int word_bits() const noexcept { return format_.word_bits; }
  const QFormat& format() const noexcept { return format_; }

  friend bool operator==(const QFixed&, const QFixed&) = default;

private:
  QFixed(std::int64_t raw, QFormat format) : raw_(raw), format_(format) {}

  std::int64_t raw_ = 0;
  QFormat format_{};
};

QFixed encode(double x, int frac_bits = 16, int word_bits = 64);
inline QFixed encode(double x, QFormat format) {
  return encode(x, format.frac_bits, format.word_bits);
}
double decode(const QFixed& q);

QFixed q_add(const QFixed& a, const QFixed& b);
QFixed q_sub(const QFixed& a, const QFixed& b);
/// Double-width product shifted right by frac_bits.
QFixed q_mul(const QFixed& a, const QFixed& b);
/// (a.raw * 2^frac_bits) / b.raw. Throws std::domain_error on b == 0.
QFixed q_div(const QFixed& a, const QFixed& b);
/// raw / 2^bits, rounded. Exact when the low `bits` bits of raw are zero.
QFixed q_shift_right(const QFixed& a, int bits);

inline QFixed operator+(const QFixed& a, const QFixed& b) { return q_add(a, b); }
inline QFixed operator-(const QFixed& a, const QFixed& b) { return q_sub(a, b); }
inline QFixed operator*(const QFixed& a, const QFixed& b) { return q_mul(a, b); }
inline QFixed operator/(const QFixed& a, const QFixed& b) { return q_div(a, b); }

/// Mesh values held as raw integers of one common format.
struct FixedMesh {
  using Grid = Eigen::Array<std::int64_t, Eigen::Dynamic, Eigen::Dynamic,
                            Eigen::RowMajor>;

  Eigen::Index n = 0;
  QFormat format;
  Grid raw;

  QFixed at(Eigen::Index i, Eigen::Index j) const {
    return QFixed::from_raw(raw(i + 1, j + 1), format);
  }
};

FixedMesh encode_mesh(const Mesh2D<double>& mesh, QFormat format);
Mesh2D<double> decode_mesh(const FixedMesh& mesh);
FixedMesh::Grid encode_forcing(const ForcingTable<double>& h2f, QFormat format);

/// Lexicographic sweep entirely in Q arithmetic. Overflow throws
/// FixedPointOverflow naming the cell.
void sweep_fixed(FixedMesh& mesh, const FixedMesh::Grid& h2f,
                 const QFixed& omega);
void sweep_fixed_red_black(FixedMesh& mesh, const FixedMesh::Grid& h2f,
                           const QFixed& omega);

/// Fixed-point counterpart of solve_mesh. The residual test decodes the mesh
/// and uses the float stencil residual; `final` holds decoded values.
SolveReport<double> solve_mesh_fixed(const PoissonProblem<double>& problem,
                                     const SorParams<double>& params,
                                     QFormat format = {});

/// Quantization floor keeps 1e-8 out of reach at 16 fractional bits.
inline constexpr double kFixedDefaultTol = 1e-3;

} // namespace sor

#endif
