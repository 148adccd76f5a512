#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "esrk/heuristics.hpp"
#include "esrk/solver.hpp"

namespace esrk {

enum class Acceptance { StableOnly, StableAndFaster };
const char* to_string(Acceptance a);
Acceptance acceptance_from_string(const std::string& text);

struct SearchConfig {
  int mutation_limit = 10;
  int fallback_limit = 100;
  double baseline_mean = 0.0;
  Acceptance acceptance = Acceptance::StableOnly;
  std::size_t max_terms = kDefaultMaxTerms;
  std::size_t max_terms_after_mutation = kDefaultMaxTermsAfterMutation;
  SolveConfig solver;
  std::uint64_t seed = 0;

  void check() const;
};

enum class RecordStatus { Accepted, RejectedUnstable, RejectedSlow };
const char* to_string(RecordStatus s);
RecordStatus record_status_from_string(const std::string& text);

struct HeuristicRecord {
  std::string expression; // canonical text; sets are joined with "; "
  RecordStatus status = RecordStatus::RejectedUnstable;
  long iterations = 0;
  int mutation_depth = 0;
  std::uint64_t solve_seed = 0;
  std::string timestamp;

  bool operator==(const HeuristicRecord&) const = default;
};

/// One JSON object per line; parse_record is its inverse.
std::string format_record(const HeuristicRecord& r);
HeuristicRecord parse_record(const std::string& line);

/// Heuristic-free solves with seeds derived from cfg.seed, run concurrently.
std::vector<SolveReport> run_baseline(std::size_t s, std::size_t n_runs, const SolveConfig& cfg);

/// Solve with the expression applied and gate the outcome.
HeuristicRecord evaluate_heuristic(std::size_t s, const HeuristicExpression& expr, double baseline_mean,
                                   const SearchConfig& cfg);

/// All expressions applied jointly. Dependent sets throw ConstraintError
/// before any solve. An empty set is a baseline solve.
HeuristicRecord evaluate_heuristic_set(std::size_t s, const std::vector<HeuristicExpression>& exprs,
                                       const SearchConfig& cfg);

/// Seed of the solve behind the k-th evaluation of a campaign.
std::uint64_t campaign_solve_seed(std::uint64_t campaign_seed, std::uint64_t evaluation);

/// Generate -> evaluate -> mutate on rejection (up to mutation_limit) ->
/// fallback to a fresh expression. Stops after `budget` evaluations or
/// `fallback_limit` fresh expressions. `sink`, when given, sees each record
/// as soon as it exists.
std::vector<HeuristicRecord> discover(std::size_t s, long budget, const SearchConfig& cfg,
                                      const std::function<void(const HeuristicRecord&)>& sink = {});

std::string utc_timestamp();

} // namespace esrk
