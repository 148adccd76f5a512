#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "esrk/heuristics.hpp"
#include "esrk/random.hpp"
#include "esrk/stability.hpp"
#include "esrk/tableau.hpp"

namespace esrk {

struct SolveConfig {
  double tol = 1e-14;
  long max_iter = 500000;
  double lo = -2.0;
  double hi = 2.0;
  double init_scale = 0.0; // <= 0 selects 1/s
  double required_extent = 8.0;
  std::size_t stability_samples = 64;
  double penalty_weight = 1.0;
  std::uint64_t seed = 0;
  int multistart = 1;

  /// Throws UsageError when tol <= 0, lo >= hi or max_iter < 1.
  void check() const;
  /// Certification gate on the order residuals (10^4 tol).
  double order_acceptance() const { return tol * 1e4; }
  StabilityConfig stability() const;
};

enum class SolveStatus { Converged, BudgetExhausted, Infeasible };
const char* to_string(SolveStatus s);
SolveStatus solve_status_from_string(const std::string& text);

struct SolveReport {
  SolveStatus status = SolveStatus::Infeasible;
  long iterations = 0;
  double residual_norm = 0.0;
  double max_order_violation = 0.0;
  StabilityReport stability;
  std::optional<ButcherTableau> tableau;    // present iff Converged
  std::optional<ReducedParameters> params;  // final iterate, heuristics applied
  double wall_time = 0.0;                   // seconds
  std::uint64_t seed = 0;
  int starts = 0;
  int free_dimension = 0;
};

/// Every coefficient independently uniform on (0, init_scale), default (0, 1/s).
ReducedParameters initial_point(std::size_t s, const SolveConfig& cfg, RandomStream& rng);

/// Finds reduced parameters meeting the order conditions, the beta
/// conditions and |R(-x)| <= 1 on [0, required_extent].
///
/// Minimizes sum r_k^2 + sum (beta_j - 1/j!)^2 + w sum max(0, |R(-x_m)| - 1)^2
/// over the free coordinates with Levenberg-Marquardt steps projected onto
/// the box [lo, hi]. Throws ConstraintError for dependent heuristics.
SolveReport solve(std::size_t s, const std::vector<HeuristicExpression>& exprs, const SolveConfig& cfg);

struct RunStatistics {
  std::size_t count = 0;    // converged runs, the population of the moments
  std::size_t failures = 0; // non-converged runs, excluded from the moments
  double mean = 0, median = 0, std = 0, min = 0, max = 0;
};

/// Descriptive statistics over iteration counts of converged runs. std is the
/// sample standard deviation (0 for a single run). Throws UsageError on an
/// empty list.
RunStatistics run_statistics(const std::vector<SolveReport>& reports);
RunStatistics iteration_statistics(const std::vector<long>& converged_iterations, std::size_t failures = 0);

/// Raw dump: `seed,status,iterations,residual_norm,wall_time`, one solve per line.
void write_run_dump(const std::vector<SolveReport>& reports, const std::string& path);

} // namespace esrk
