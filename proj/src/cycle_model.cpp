#include "sor/cycle_model.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sor::cycles {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out;
  if (__builtin_add_overflow(a, b, &out))
    throw std::overflow_error("cycle count overflow");
  return out;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out;
  if (__builtin_mul_overflow(a, b, &out))
    throw std::overflow_error("cycle count overflow");
  return out;
}

} // namespace

Stmt::Stmt() : node_(std::make_shared<const StmtNode>(StmtNode{Assign{}})) {}

Stmt assign() { return Stmt(); }

Stmt seq(std::vector<Stmt> children) {
  return Stmt(std::make_shared<const StmtNode>(StmtNode{Seq{std::move(children)}}));
}

Stmt par(std::vector<Stmt> children) {
  return Stmt(std::make_shared<const StmtNode>(StmtNode{Par{std::move(children)}}));
}

Stmt loop(std::uint64_t trip_count, Stmt body) {
  return Stmt(std::make_shared<const StmtNode>(
      StmtNode{Loop{trip_count, std::move(body)}}));
}

std::uint64_t cycles(const Stmt& s) {
  return std::visit(
      overloaded{
          [](const Assign&) -> std::uint64_t { return 1; },
          [](const Seq& block) {
            std::uint64_t total = 0;
            for (const Stmt& child : block.children)
              total = checked_add(total, cycles(child));
            return total;
          },
          [](const Par& block) {
            std::uint64_t longest = 0;
            for (const Stmt& child : block.children)
              longest = std::max(longest, cycles(child));
            return longest;
          },
          [](const Loop& l) { return checked_mul(l.trip_count, cycles(l.body)); },
      },
      s.node().kind);
}

double model_time(std::uint64_t cycle_count, const ClockSpec& clock) {
  if (!(clock.frequency_hz > 0.0))
    throw std::invalid_argument("clock frequency must be positive");
  return static_cast<double>(cycle_count) / clock.frequency_hz;
}

double model_time(const Stmt& s, const ClockSpec& clock) {
  return model_time(cycles(s), clock);
}

Stmt build_sor_schedule(std::uint64_t n, ScheduleVariant variant,
                        std::uint64_t sweeps, unsigned assigns_per_cell) {
  if (n == 0)
    throw std::invalid_argument("schedule needs n >= 1");
  if (sweeps == 0)
    throw std::invalid_argument("schedule needs at least one sweep");

  const Stmt cell = seq(std::vector<Stmt>(assigns_per_cell, assign()));
  const std::uint64_t cells = checked_mul(n, n);

  if (variant == ScheduleVariant::sequential)
    return loop(sweeps, seq(std::vector<Stmt>(cells, cell)));

  const std::uint64_t red = (cells + 1) / 2;
  const std::uint64_t black = cells / 2;
  return loop(sweeps, seq({par(std::vector<Stmt>(red, cell)),
                           par(std::vector<Stmt>(black, cell))}));
}

namespace {

void write_node(std::ostream& out, const Stmt& s, int depth) {
  const std::string indent(static_cast<std::size_t>(2 * depth), ' ');
  std::visit(overloaded{
                 [&](const Assign&) { out << indent << "assign\n"; },
                 [&](const Seq& block) {
                   out << indent << "seq\n";
                   for (const Stmt& c : block.children)
                     write_node(out, c, depth + 1);
                 },
                 [&](const Par& block) {
                   out << indent << "par\n";
                   for (const Stmt& c : block.children)
                     write_node(out, c, depth + 1);
                 },
                 [&](const Loop& l) {
                   out << indent << "loop " << l.trip_count << '\n';
                   write_node(out, l.body, depth + 1);
                 },
             },
             s.node().kind);
}

struct Line {
  int depth;
  std::string_view word;
  std::string_view arg;
  std::size_t number;
};

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw std::invalid_argument("statement text line " + std::to_string(line) +
                              ": " + what);
}

std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  while (!text.empty()) {
    const std::size_t end = text.find('\n');
    std::string_view raw = text.substr(0, end);
    text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
    ++number;
    if (!raw.empty() && raw.back() == '\r')
      raw.remove_suffix(1);
    if (raw.find_first_not_of(' ') == std::string_view::npos)
      continue;

    const std::size_t spaces = raw.find_first_not_of(' ');
    if (spaces % 2 != 0)
      parse_error(number, "indentation must be a multiple of two spaces");
    raw.remove_prefix(spaces);
    const std::size_t gap = raw.find(' ');
    Line line{static_cast<int>(spaces / 2), raw.substr(0, gap), {}, number};
    if (gap != std::string_view::npos) {
      const std::size_t arg = raw.find_first_not_of(' ', gap);
      if (arg != std::string_view::npos)
        line.arg = raw.substr(arg);
    }
    lines.push_back(line);
  }
  return lines;
}

class Parser {
public:
  explicit Parser(std::vector<Line> lines) : lines_(std::move(lines)) {}

  Stmt parse_root() {
    if (lines_.empty())
      throw std::invalid_argument("statement text is empty");
    if (lines_[0].depth != 0)
      parse_error(lines_[0].number, "root must not be indented");
    Stmt root = parse(0);
    if (pos_ != lines_.size())
      parse_error(lines_[pos_].number, "more than one root statement");
    return root;
  }

private:
  Stmt parse(int depth) {
    const Line& line = lines_[pos_++];
    if (line.word == "assign") {
      expect_no_arg(line);
      if (has_child(depth))
        parse_error(lines_[pos_].number, "assign takes no children");
      return assign();
    }
    if (line.word == "seq" || line.word == "par") {
      expect_no_arg(line);
      std::vector<Stmt> children;
      while (has_child(depth))
        children.push_back(parse(depth + 1));
      return line.word == "seq" ? seq(std::move(children))
                                : par(std::move(children));
    }
    if (line.word == "loop") {
      std::uint64_t trips = 0;
      const auto [end, ec] =
          std::from_chars(line.arg.data(), line.arg.data() + line.arg.size(), trips);
      if (ec != std::errc{} || end != line.arg.data() + line.arg.size() ||
          line.arg.empty())
        parse_error(line.number, "loop needs a non-negative trip count");
      if (!has_child(depth))
        parse_error(line.number, "loop needs a body");
      Stmt body = parse(depth + 1);
      if (has_child(depth))
        parse_error(lines_[pos_].number, "loop takes exactly one body");
      return loop(trips, std::move(body));
    }
    parse_error(line.number, "unknown statement '" + std::string(line.word) + "'");
  }

  bool has_child(int depth) const {
    if (pos_ >= lines_.size() || lines_[pos_].depth <= depth)
      return false;
    if (lines_[pos_].depth != depth + 1)
      parse_error(lines_[pos_].number, "indentation jumps more than one level");
    return true;
  }

  static void expect_no_arg(const Line& line) {
    if (!line.arg.empty())
      parse_error(line.number, "unexpected argument");
  }

  std::vector<Line> lines_;
  std::size_t pos_ = 0;
};

} // namespace

void write_text(std::ostream& out, const Stmt& s) { write_node(out, s, 0); }

std::string to_text(const Stmt& s) {
  std::ostringstream out;
  write_text(out, s);
  return out.str();
}

Stmt from_text(std::string_view text) { return Parser(tokenize(text)).parse_root(); }

} // namespace sor::cycles
