#ifndef SOR_BENCH_HPP
#define SOR_BENCH_HPP

// Mesh-size and relaxation-factor batches over shifted_sine_problem, with
// cycle-model columns for the sequential and red-black schedules.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sor/cycle_model.hpp"
#include "sor/splitting.hpp"

namespace sor::bench {

struct Arithmetic {
  bool fixed = false;
  int frac_bits = 16;

  /// "float" or "fixed:<f>".
  static Arithmetic parse(std::string_view text);
  std::string to_string() const;
};

/// Inclusive grid start, start + step, ... up to stop.
struct OmegaRange {
  double start = 1.0;
  double stop = 1.95;
  double step = 0.05;

  /// "a:b:c" (start:stop:step).
  static OmegaRange parse(std::string_view text);
  std::vector<double> values() const;
};

Ordering parse_ordering(std::string_view text);  // "lex" | "rb"
std::string_view ordering_name(Ordering ordering);

inline std::vector<std::size_t> default_sizes() {
  return {8, 16, 32, 64, 128, 256, 512};
}

struct RunConfig {
  std::vector<std::size_t> sizes = default_sizes();
  double omega = 1.5;
  std::optional<OmegaRange> omega_range;
  /// Unset: 1e-8 for float runs, kFixedDefaultTol for fixed-point runs.
  std::optional<double> tol;
  std::optional<std::size_t> max_sweeps;
  Ordering ordering = Ordering::lexicographic;
  Arithmetic arithmetic;
  double frequency_hz = 100e6;
  /// Unset: zero initial guess. Set: uniform [-1, 1] interior guess.
  std::optional<std::uint64_t> seed;
  std::string output;
  unsigned assigns_per_cell = cycles::kDefaultAssignsPerCell;
  unsigned jobs = 1;

  double effective_tol() const;
};

/// Throws std::invalid_argument on an empty size list, a zero size or a
/// non-positive tolerance/frequency.
void validate(const RunConfig& config);

struct ReportRow {
  std::size_t size = 0;
  double omega = 0.0;
  std::string arithmetic;
  std::string ordering;
  std::size_t iterations = 0;
  double final_residual = 0.0;
  double wall_time_s = 0.0;
  std::uint64_t model_cycles_seq = 0;
  std::uint64_t model_cycles_par = 0;
  std::optional<double> model_speedup;
  bool converged = false;
  bool diverged = false;
  std::string error;
};

inline constexpr std::string_view kCsvHeader =
    "size,omega,arithmetic,ordering,iterations,final_residual,wall_time_s,"
    "model_cycles_seq,model_cycles_par,model_speedup,converged";

/// One solve of shifted_sine_problem at `size`, plus both cycle schedules with
/// sweeps = measured iterations. Failures land in the row, never thrown.
ReportRow run_single(const RunConfig& config, std::size_t size, double omega);

/// One row per size, in config order; writes CSV to config.output if set.
std::vector<ReportRow> run_bench(const RunConfig& config);

void write_csv(std::ostream& out, const std::vector<ReportRow>& rows);

struct OmegaSweepRow {
  double omega = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool minimizer = false;
};

inline constexpr std::string_view kOmegaCsvHeader =
    "omega,iterations,converged,minimizer";

/// Iteration count per omega at config.sizes.front(). The minimizer is the
/// smallest omega with the fewest iterations among converged runs.
std::vector<OmegaSweepRow> run_omega_sweep(const RunConfig& config);

void write_omega_csv(std::ostream& out, const std::vector<OmegaSweepRow>& rows);

/// Writes `text` to a file, throwing std::runtime_error on failure.
void write_file(const std::string& path, const std::string& text);

} // namespace sor::bench

#endif
