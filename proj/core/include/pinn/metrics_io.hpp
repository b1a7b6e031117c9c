#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pinn {

/// Dense space-time field on a tensor grid. Each component is stored
/// row-major with t as the slow axis: value[it * x.size() + ix].
struct SolutionGrid {
  std::vector<double> t;
  std::vector<double> x;
  std::vector<std::string> components;        ///< one label per value array
  std::vector<std::vector<double>> values;    ///< components arrays, t-major
  std::vector<std::vector<double>> reference; ///< optional; same shape as values

  /// Throws ArgumentError unless grids are strictly ascending, labels match
  /// arrays, and every array has t.size()*x.size() entries.
  void validate() const;
};

/// ‖pred − exact‖₂ / ‖exact‖₂ over flattened entries.
/// Throws ArgumentError on shape mismatch or ‖exact‖ = 0.
double rel_l2(std::span<const double> pred, std::span<const double> exact);

/// CSV exchange format: header "t,x,<comp>...[,<comp>_exact...]", then one
/// row per (t,x) pair in t-major order, 17 significant digits (lossless).
void write_grid(const SolutionGrid& grid, const std::string& path);
SolutionGrid read_grid(const std::string& path);

/// One benchmark run's reportable facts.
struct RunSummary {
  std::string problem;
  std::uint64_t seed = 0;
  std::string architecture;  ///< e.g. "2-20-20-1"
  std::int64_t n_u = 0, n_f = 0, n_0 = 0, n_b = 0, n_n = 0;
  std::int64_t q = 0;
  double dt = 0.0;
  double rel_l2 = 0.0;
  std::int64_t iterations = 0;
  double wall_seconds = 0.0;
  std::string reason;
};

/// Render as a self-describing key-value record terminated by "---".
std::string format_summary(const RunSummary& s);

/// Parse one record produced by format_summary.
/// Throws ParseError with the offending 1-based line.
RunSummary parse_summary(const std::string& text);

/// Append one record to a ledger file under an exclusive advisory lock.
void append_summary(const RunSummary& s, const std::string& ledger_path);

/// Read every record from a ledger file (tolerates a trailing partial line).
std::vector<RunSummary> read_summaries(const std::string& ledger_path);

}  // namespace pinn
