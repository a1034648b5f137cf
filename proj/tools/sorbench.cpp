// sorbench: SOR solves, mesh-size benchmarks, relaxation-factor sweeps and
// cycle-model schedules for the 2D Poisson model problem.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sor/bench.hpp"
#include "sor/cycle_model.hpp"

namespace {

struct CliOptions {
  std::vector<std::size_t> sizes;
  std::string omega = "1.5";
  std::optional<double> tol;
  std::optional<std::size_t> max_sweeps;
  std::string ordering = "lex";
  std::string arith = "float";
  double freq_hz = 100e6;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool large = false;
  unsigned jobs = 1;
  unsigned assigns_per_cell = sor::cycles::kDefaultAssignsPerCell;
  std::uint64_t sweeps = 1;
  std::string emit_schedule;
};

bool is_range(const std::string& omega) {
  return omega.find(':') != std::string::npos;
}

sor::bench::RunConfig to_config(const CliOptions& opt,
                                std::vector<std::size_t> default_sizes) {
  sor::bench::RunConfig config;
  config.sizes = opt.sizes.empty() ? std::move(default_sizes) : opt.sizes;
  if (opt.large && opt.sizes.empty()) {
    config.sizes.push_back(1024);
    config.sizes.push_back(2048);
  }
  if (is_range(opt.omega))
    config.omega_range = sor::bench::OmegaRange::parse(opt.omega);
  else
    config.omega = std::stod(opt.omega);
  config.tol = opt.tol;
  config.max_sweeps = opt.max_sweeps;
  config.ordering = sor::bench::parse_ordering(opt.ordering);
  config.arithmetic = sor::bench::Arithmetic::parse(opt.arith);
  config.frequency_hz = opt.freq_hz;
  config.seed = opt.seed;
  config.output = opt.out;
  config.assigns_per_cell = opt.assigns_per_cell;
  config.jobs = opt.jobs;
  return config;
}

bool all_converged(const std::vector<sor::bench::ReportRow>& rows) {
  for (const auto& r : rows)
    if (!r.converged)
      return false;
  return true;
}

int run_solve(const CliOptions& opt) {
  auto config = to_config(opt, {32});
  if (config.omega_range)
    throw std::invalid_argument("solve takes a single omega");
  const auto rows = sor::bench::run_bench(config);
  std::cout << std::setprecision(17);
  for (const auto& r : rows) {
    std::cout << "size " << r.size << ": "
              << (r.converged ? "converged" : r.diverged ? "diverged" : "hit sweep cap")
              << " after " << r.iterations << " sweeps, residual "
              << r.final_residual << ", " << r.wall_time_s << " s";
    if (!r.error.empty())
      std::cout << " (" << r.error << ")";
    std::cout << '\n';
  }
  return all_converged(rows) ? 0 : 1;
}

int run_bench(const CliOptions& opt) {
  auto config = to_config(opt, sor::bench::default_sizes());
  if (config.omega_range)
    throw std::invalid_argument("bench takes a single omega; use omega-sweep");
  const auto rows = sor::bench::run_bench(config);
  if (config.output.empty())
    sor::bench::write_csv(std::cout, rows);
  for (const auto& r : rows)
    if (!r.error.empty())
      std::cerr << "size " << r.size << ": " << r.error << '\n';
  return all_converged(rows) ? 0 : 1;
}

int run_omega_sweep(const CliOptions& opt) {
  auto config = to_config(opt, {64});
  if (!config.omega_range)
    config.omega_range = sor::bench::OmegaRange{};
  const auto rows = sor::bench::run_omega_sweep(config);
  if (config.output.empty())
    sor::bench::write_omega_csv(std::cout, rows);
  for (const auto& r : rows)
    if (!r.converged)
      return 1;
  return 0;
}

int run_cycles(const CliOptions& opt) {
  using sor::cycles::ScheduleVariant;
  const auto config = to_config(opt, {8});
  const sor::cycles::ClockSpec clock{config.frequency_hz};

  std::ostringstream table;
  table << std::setprecision(17)
        << "size,sweeps,assigns_per_cell,model_cycles_seq,model_cycles_par,"
           "model_time_seq_s,model_time_par_s,model_speedup\n";
  for (std::size_t n : config.sizes) {
    const auto seq = sor::cycles::cycles(sor::cycles::build_sor_schedule(
        n, ScheduleVariant::sequential, opt.sweeps, opt.assigns_per_cell));
    const auto par = sor::cycles::cycles(sor::cycles::build_sor_schedule(
        n, ScheduleVariant::red_black, opt.sweeps, opt.assigns_per_cell));
    table << n << ',' << opt.sweeps << ',' << opt.assigns_per_cell << ',' << seq
          << ',' << par << ',' << sor::cycles::model_time(seq, clock) << ','
          << sor::cycles::model_time(par, clock) << ','
          << static_cast<double>(seq) / static_cast<double>(par) << '\n';
  }
  if (config.output.empty())
    std::cout << table.str();
  else
    sor::bench::write_file(config.output, table.str());

  if (!opt.emit_schedule.empty()) {
    const auto variant = config.ordering == sor::Ordering::lexicographic
                             ? ScheduleVariant::sequential
                             : ScheduleVariant::red_black;
    sor::bench::write_file(
        opt.emit_schedule,
        sor::cycles::to_text(sor::cycles::build_sor_schedule(
            config.sizes.front(), variant, opt.sweeps, opt.assigns_per_cell)));
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Successive over-relaxation solver, benchmark and cycle model"};
  app.set_config("--config", "", "key = value file mirroring the flags");
  app.require_subcommand(1);
  app.fallthrough();

  CliOptions opt;
  app.add_option("--size", opt.sizes, "Interior points per side (repeat or comma list)")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  app.add_option("--omega", opt.omega, "Relaxation factor, or start:stop:step for omega-sweep");
  app.add_option("--tol", opt.tol, "Relative residual tolerance (default 1e-8, fixed: 1e-3)");
  app.add_option("--max-sweeps", opt.max_sweeps, "Sweep cap (default 100 * n^2)");
  app.add_option("--ordering", opt.ordering, "Sweep ordering")
      ->check(CLI::IsMember({"lex", "rb"}));
  app.add_option("--arith", opt.arith, "float or fixed:<frac_bits>");
  app.add_option("--freq-hz", opt.freq_hz, "Clock frequency for model times");
  app.add_option("--seed", opt.seed, "Random initial guess seed (default: zero guess)");
  app.add_option("--out", opt.out, "CSV output path (default: stdout)");
  app.add_flag("--large", opt.large, "Append 1024 and 2048 to the default sizes");
  app.add_option("--jobs", opt.jobs, "Sizes solved concurrently")
      ->check(CLI::PositiveNumber);
  app.add_option("--assigns-per-cell", opt.assigns_per_cell,
                 "Assignments per cell update in the cycle model")
      ->check(CLI::PositiveNumber);
  app.add_option("--sweeps", opt.sweeps, "Sweeps in the cycles schedule")
      ->check(CLI::PositiveNumber);
  app.add_option("--emit-schedule", opt.emit_schedule,
                 "cycles: write the schedule tree for the first size");

  auto* solve = app.add_subcommand("solve", "Solve the model Poisson problem");
  auto* bench = app.add_subcommand("bench", "Mesh-size progression to CSV");
  auto* sweep = app.add_subcommand("omega-sweep", "Iterations per relaxation factor");
  auto* cyc = app.add_subcommand("cycles", "Cycle-model schedule costs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (solve->parsed())
      return run_solve(opt);
    if (bench->parsed())
      return run_bench(opt);
    if (sweep->parsed())
      return run_omega_sweep(opt);
    if (cyc->parsed())
      return run_cycles(opt);
  } catch (const std::exception& e) {
    std::cerr << "sorbench: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
