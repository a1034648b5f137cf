#ifndef SOR_CYCLE_MODEL_HPP
#define SOR_CYCLE_MODEL_HPP

// Clock-cycle cost model with Handel-C timing rules: an assignment takes one
// cycle, a par block takes as long as its longest branch, and control flow
// and expression evaluation are free.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sor::cycles {

struct StmtNode;

/// Immutable statement tree handle. Copies share structure, so a schedule
/// that repeats one cell update n^2 times stores that update once.
class Stmt {
public:
  Stmt();  // Assign

  const StmtNode& node() const { return *node_; }

  friend Stmt assign();
  friend Stmt seq(std::vector<Stmt> children);
  friend Stmt par(std::vector<Stmt> children);
  friend Stmt loop(std::uint64_t trip_count, Stmt body);

private:
  explicit Stmt(std::shared_ptr<const StmtNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const StmtNode> node_;
};

struct Assign {};
struct Seq {
  std::vector<Stmt> children;
};
struct Par {
  std::vector<Stmt> children;
};
struct Loop {
  std::uint64_t trip_count;
  Stmt body;
};

struct StmtNode {
  std::variant<Assign, Seq, Par, Loop> kind;
};

Stmt assign();
Stmt seq(std::vector<Stmt> children);
Stmt par(std::vector<Stmt> children);
Stmt loop(std::uint64_t trip_count, Stmt body);

/// Assign = 1, Seq = sum, Par = max (0 when empty), Loop = trips * body.
/// Throws std::overflow_error if the count does not fit in 64 bits.
std::uint64_t cycles(const Stmt& s);

struct ClockSpec {
  double frequency_hz;
};

/// cycles(s) / frequency, in seconds.
double model_time(const Stmt& s, const ClockSpec& clock);
double model_time(std::uint64_t cycle_count, const ClockSpec& clock);

enum class ScheduleVariant { sequential, red_black };

inline constexpr unsigned kDefaultAssignsPerCell = 6;

/// sequential: Loop(sweeps, Seq(n^2 cell updates));
/// red_black:  Loop(sweeps, Seq(Par(red cells), Par(black cells))).
/// Each cell update is Seq of `assigns_per_cell` assignments.
Stmt build_sor_schedule(std::uint64_t n, ScheduleVariant variant,
                        std::uint64_t sweeps,
                        unsigned assigns_per_cell = kDefaultAssignsPerCell);

/// Line-oriented text form: one node per line ("assign", "seq", "par",
/// "loop <trips>"), children indented two spaces deeper than their parent.
std::string to_text(const Stmt& s);
void write_text(std::ostream& out, const Stmt& s);
/// Throws std::invalid_argument on malformed input.
Stmt from_text(std::string_view text);

} // namespace sor::cycles

#endif
