#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "esrk/benchmarks.hpp"
#include "esrk/order_conditions.hpp"
#include "esrk/search.hpp"
#include "esrk/solver.hpp"
#include "esrk/stability.hpp"
#include "esrk/tableau.hpp"

namespace esrk {

struct CampaignConfig {
  std::size_t s = 16;
  SolveConfig solver;  // solver.seed is ignored; `seed` drives everything
  SearchConfig search; // search.solver and search.seed likewise
  std::vector<std::string> problems = {"brusselator1d", "brusselator2d", "stokes"};
  std::vector<double> steps; // empty: each problem's suggested grid
  std::string output_dir = ".";
  std::uint64_t seed = 0;

  void check() const;
  /// Solver settings with the campaign seed folded in.
  SolveConfig effective_solver() const;
  SearchConfig effective_search() const;

  bool operator==(const CampaignConfig& o) const { return to_text() == o.to_text(); }

  /// Pretty-printed JSON with every field present.
  std::string to_text() const;
  static CampaignConfig from_text(const std::string& text);
  static CampaignConfig load(const std::string& path);

  /// Override one field by dotted key ("s", "seed", "solver.tol",
  /// "search.acceptance", "benchmarks.problems", ...). The value is parsed as JSON when
  /// possible, otherwise taken as a string.
  void set(const std::string& key, const std::string& value);
};

/// A tableau as stored on disk. Reduced documents carry a_sub/b; documents
/// with a full "A" matrix are accepted for schemes outside the reduced form.
struct TableauDocument {
  std::optional<ReducedParameters> reduced;
  ButcherTableau tableau;
  std::vector<std::string> heuristics;
  std::optional<std::uint64_t> solver_seed;
  std::string timestamp;
};

TableauDocument read_tableau_document(const std::string& path);
TableauDocument parse_tableau_document(const std::string& text);
std::string format_tableau_document(const ReducedParameters& params, const std::vector<std::string>& heuristics,
                                    std::uint64_t solver_seed, const std::string& timestamp,
                                    const CampaignConfig& cfg);

/// Certification of one tableau: structure, order conditions, stability.
struct Certification {
  std::vector<std::string> structure;
  OrderResiduals order;
  double order_tol = kDefaultOrderTol;
  StabilityReport stability;
  double required_extent = 0.0;
  std::vector<std::string> violations;

  bool order_pass() const { return order.max_abs() <= order_tol; }
  bool beta_pass(double beta_tol) const { return stability.beta_error <= beta_tol; }
  bool pass() const { return violations.empty(); }
};

Certification certify_tableau(const ButcherTableau& t, const StabilityConfig& sc, double order_tol = kDefaultOrderTol);
std::string format_certification(const Certification& c, const StabilityConfig& sc);

// Commands. Each returns the process exit code (0 ok, 1 computational
// failure) and throws UsageError / ParseError / IoError for code 2.

struct CommandResult {
  int exit_code = 0;
  std::string summary; // JSON printed to stdout by the CLI
};

CommandResult cmd_baseline(long runs, const CampaignConfig& cfg);
CommandResult cmd_discover(long budget, const CampaignConfig& cfg);
CommandResult cmd_solve(const std::vector<std::string>& heuristic_texts, const CampaignConfig& cfg,
                        const std::string& tableau_path);
CommandResult cmd_validate(const std::string& tableau_path, const CampaignConfig& cfg,
                           const std::string& grid_path = {});
CommandResult cmd_converge(const std::string& tableau_path, const std::string& problem, const CampaignConfig& cfg,
                           const std::string& study_path = {});

struct GridSpec {
  double re_min = -20.0, re_max = 2.0, im_min = -10.0, im_max = 10.0;
  std::size_t nx = 221, ny = 201;
};
CommandResult cmd_stability(const std::string& tableau_path, const GridSpec& grid, const CampaignConfig& cfg,
                            const std::string& grid_path);

// Output file names inside output_dir.
inline constexpr const char* kBaselineStatsFile = "baseline_stats.json";
inline constexpr const char* kBaselineDumpFile = "baseline_runs.csv";
inline constexpr const char* kStoreFile = "heuristics.jsonl";
inline constexpr const char* kDiscoverReportFile = "discover_report.json";

/// Append one line and flush so a killed campaign leaves whole lines only.
void append_line(const std::string& path, const std::string& line);
std::vector<HeuristicRecord> read_store(const std::string& path);

/// Mean iteration count stored in a baseline statistics file.
double read_baseline_mean(const std::string& stats_path);

std::string join_path(const std::string& dir, const std::string& name);

} // namespace esrk
