#include "sor/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "sor/fixed_point.hpp"
#include "sor/problem.hpp"
#include "sor/stencil.hpp"

namespace sor::bench {

namespace {

double parse_double(std::string_view text, const char* what) {
  double value = 0.0;
  const auto [end, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size())
    throw std::invalid_argument(std::string("cannot parse ") + what + " '" +
                                std::string(text) + "'");
  return value;
}

SolveReport<double> solve_model(const RunConfig& config, std::size_t size,
                               double omega) {
  auto problem = shifted_sine_problem<double>(static_cast<Eigen::Index>(size));
  if (config.seed) {
    std::mt19937_64 rng(*config.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (Eigen::Index i = 0; i < problem.mesh.size(); ++i)
      for (Eigen::Index j = 0; j < problem.mesh.size(); ++j)
        problem.mesh.at(i, j) = dist(rng);
  }

  SorParams<double> params;
  params.omega = omega;
  params.tol = config.effective_tol();
  params.max_sweeps = config.max_sweeps;
  params.ordering = config.ordering;

  if (config.arithmetic.fixed)
    return solve_mesh_fixed(problem, params,
                            QFormat{config.arithmetic.frac_bits, 64});
  return solve_mesh(problem, params);
}

} // namespace

Arithmetic Arithmetic::parse(std::string_view text) {
  if (text == "float")
    return {};
  constexpr std::string_view prefix = "fixed:";
  if (text.substr(0, prefix.size()) == prefix) {
    const std::string_view bits = text.substr(prefix.size());
    int f = 0;
    const auto [end, ec] = std::from_chars(bits.data(), bits.data() + bits.size(), f);
    if (ec == std::errc{} && end == bits.data() + bits.size() && !bits.empty()) {
      validate(QFormat{f, 64});
      return {true, f};
    }
  }
  throw std::invalid_argument("arithmetic must be 'float' or 'fixed:<bits>', got '" +
                              std::string(text) + "'");
}

std::string Arithmetic::to_string() const {
  return fixed ? "fixed:" + std::to_string(frac_bits) : "float";
}

OmegaRange OmegaRange::parse(std::string_view text) {
  const std::size_t a = text.find(':');
  const std::size_t b = a == std::string_view::npos ? a : text.find(':', a + 1);
  if (b == std::string_view::npos)
    throw std::invalid_argument("omega range must be start:stop:step");
  return {parse_double(text.substr(0, a), "omega range start"),
          parse_double(text.substr(a + 1, b - a - 1), "omega range stop"),
          parse_double(text.substr(b + 1), "omega range step")};
}

std::vector<double> OmegaRange::values() const {
  if (!(step > 0.0))
    throw std::invalid_argument("omega range step must be positive");
  if (!(start > 0.0) || !(stop < 2.0) || stop < start)
    throw std::invalid_argument("omega range must lie within (0, 2)");
  std::vector<double> out;
  // Integer multiples of step; the slack absorbs the representation error of
  // decimal steps such as 0.05.
  for (std::size_t k = 0;; ++k) {
    const double w = start + static_cast<double>(k) * step;
    if (w > stop + 1e-9 * step)
      break;
    out.push_back(w);
  }
  return out;
}

Ordering parse_ordering(std::string_view text) {
  if (text == "lex")
    return Ordering::lexicographic;
  if (text == "rb")
    return Ordering::red_black;
  throw std::invalid_argument("ordering must be 'lex' or 'rb', got '" +
                              std::string(text) + "'");
}

std::string_view ordering_name(Ordering ordering) {
  return ordering == Ordering::lexicographic ? "lex" : "rb";
}

double RunConfig::effective_tol() const {
  if (tol)
    return *tol;
  return arithmetic.fixed ? kFixedDefaultTol : 1e-8;
}

void validate(const RunConfig& config) {
  if (config.sizes.empty())
    throw std::invalid_argument("at least one mesh size is required");
  for (std::size_t s : config.sizes)
    if (s < 1)
      throw std::invalid_argument("mesh sizes must be >= 1");
  if (!(config.effective_tol() > 0.0))
    throw std::invalid_argument("tol must be positive");
  if (!std::isfinite(config.omega))
    throw std::invalid_argument("omega must be finite");
  if (!(config.frequency_hz > 0.0))
    throw std::invalid_argument("frequency must be positive");
  if (config.max_sweeps && *config.max_sweeps < 1)
    throw std::invalid_argument("max_sweeps must be at least 1");
}

ReportRow run_single(const RunConfig& config, std::size_t size, double omega) {
  ReportRow row;
  row.size = size;
  row.omega = omega;
  row.arithmetic = config.arithmetic.to_string();
  row.ordering = std::string(ordering_name(config.ordering));

  try {
    const SolveReport<double> report = solve_model(config, size, omega);
    row.iterations = report.iterations;
    row.final_residual = report.final_residual();
    row.wall_time_s = report.wall_time;
    row.converged = report.converged;
    row.diverged = report.diverged;

    if (report.iterations > 0) {
      using cycles::ScheduleVariant;
      row.model_cycles_seq = cycles::cycles(cycles::build_sor_schedule(
          size, ScheduleVariant::sequential, report.iterations,
          config.assigns_per_cell));
      row.model_cycles_par = cycles::cycles(cycles::build_sor_schedule(
          size, ScheduleVariant::red_black, report.iterations,
          config.assigns_per_cell));
      if (row.model_cycles_par > 0)
        row.model_speedup = static_cast<double>(row.model_cycles_seq) /
                            static_cast<double>(row.model_cycles_par);
    }
  } catch (const std::exception& e) {
    row.converged = false;
    row.diverged = true;
    row.error = e.what();
  }
  return row;
}

std::vector<ReportRow> run_bench(const RunConfig& config) {
  validate(config);
  std::vector<ReportRow> rows(config.sizes.size());

  const unsigned workers = std::clamp<unsigned>(
      config.jobs, 1, static_cast<unsigned>(config.sizes.size()));
  if (workers == 1) {
    for (std::size_t k = 0; k < rows.size(); ++k)
      rows[k] = run_single(config, config.sizes[k], config.omega);
  } else {
    // Each worker claims the next unclaimed size; rows stay in config order.
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < rows.size(); k = next++)
          rows[k] = run_single(config, config.sizes[k], config.omega);
      });
  }

  if (!config.output.empty()) {
    std::ostringstream csv;
    write_csv(csv, rows);
    write_file(config.output, csv.str());
  }
  return rows;
}

void write_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17) << kCsvHeader << '\n';
  for (const ReportRow& r : rows) {
    out << r.size << ',' << r.omega << ',' << r.arithmetic << ',' << r.ordering
        << ',' << r.iterations << ',' << r.final_residual << ','
        << r.wall_time_s << ',' << r.model_cycles_seq << ','
        << r.model_cycles_par << ',';
    if (r.model_speedup)
      out << *r.model_speedup;
    out << ',' << (r.converged ? "true" : "false") << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

std::vector<OmegaSweepRow> run_omega_sweep(const RunConfig& config) {
  validate(config);
  if (!config.omega_range)
    throw std::invalid_argument("omega sweep needs an omega range");

  std::vector<OmegaSweepRow> rows;
  for (double omega : config.omega_range->values()) {
    OmegaSweepRow row;
    row.omega = omega;
    try {
      const auto report = solve_model(config, config.sizes.front(), omega);
      row.iterations = report.iterations;
      row.converged = report.converged;
    } catch (const std::exception&) {
      row.converged = false;
    }
    rows.push_back(row);
  }

  auto best = rows.end();
  for (auto it = rows.begin(); it != rows.end(); ++it)
    if (it->converged && (best == rows.end() || it->iterations < best->iterations))
      best = it;
  if (best != rows.end())
    best->minimizer = true;

  if (!config.output.empty()) {
    std::ostringstream csv;
    write_omega_csv(csv, rows);
    write_file(config.output, csv.str());
  }
  return rows;
}

void write_omega_csv(std::ostream& out, const std::vector<OmegaSweepRow>& rows) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17) << kOmegaCsvHeader << '\n';
  for (const OmegaSweepRow& r : rows)
    out << r.omega << ',' << r.iterations << ','
        << (r.converged ? "true" : "false") << ','
        << (r.minimizer ? "true" : "false") << '\n';
  out.flags(flags);
  out.precision(precision);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file)
    throw std::runtime_error("cannot open '" + path + "' for writing");
  file << text;
  if (!file)
    throw std::runtime_error("failed writing '" + path + "'");
}

} // namespace sor::bench
