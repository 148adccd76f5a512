#include "esrk/search.hpp"

#include <chrono>
#include <ctime>

#include <json.hpp>

#include "esrk/error.hpp"
#include "esrk/parallel.hpp"

namespace esrk {

const char* to_string(Acceptance a) { return a == Acceptance::StableOnly ? "StableOnly" : "StableAndFaster"; }

Acceptance acceptance_from_string(const std::string& text) {
  if (text == "StableOnly") return Acceptance::StableOnly;
  if (text == "StableAndFaster") return Acceptance::StableAndFaster;
  throw UsageError("unknown acceptance mode '" + text + "'; expected StableOnly or StableAndFaster");
}

void SearchConfig::check() const {
  if (mutation_limit < 0) throw UsageError("mutation_limit must be >= 0");
  if (fallback_limit < 1) throw UsageError("fallback_limit must be >= 1");
  if (max_terms < 1 || max_terms_after_mutation < 1) throw UsageError("term limits must be >= 1");
  solver.check();
}

const char* to_string(RecordStatus s) {
  switch (s) {
  case RecordStatus::Accepted: return "Accepted";
  case RecordStatus::RejectedUnstable: return "RejectedUnstable";
  case RecordStatus::RejectedSlow: return "RejectedSlow";
  }
  return "?";
}

RecordStatus record_status_from_string(const std::string& text) {
  if (text == "Accepted") return RecordStatus::Accepted;
  if (text == "RejectedUnstable") return RecordStatus::RejectedUnstable;
  if (text == "RejectedSlow") return RecordStatus::RejectedSlow;
  throw ParseError("unknown record status '" + text + "'", 0);
}

std::string format_record(const HeuristicRecord& r) {
  nlohmann::ordered_json j;
  j["expression"] = r.expression;
  j["status"] = to_string(r.status);
  j["iterations"] = r.iterations;
  j["mutation_depth"] = r.mutation_depth;
  j["solve_seed"] = r.solve_seed;
  j["timestamp"] = r.timestamp;
  return j.dump();
}

HeuristicRecord parse_record(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    HeuristicRecord r;
    r.expression = j.at("expression").get<std::string>();
    r.status = record_status_from_string(j.at("status").get<std::string>());
    r.iterations = j.at("iterations").get<long>();
    r.mutation_depth = j.at("mutation_depth").get<int>();
    r.solve_seed = j.at("solve_seed").get<std::uint64_t>();
    r.timestamp = j.at("timestamp").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed store record: ") + e.what(), 0);
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<SolveReport> run_baseline(std::size_t s, std::size_t n_runs, const SolveConfig& cfg) {
  if (n_runs < 1) throw UsageError("baseline needs at least one run");
  std::vector<SolveReport> reports(n_runs);
  parallel_for(n_runs, [&](std::size_t k) {
    SolveConfig run = cfg;
    run.seed = derive_seed(cfg.seed, k);
    reports[k] = solve(s, {}, run);
  });
  return reports;
}

namespace {

HeuristicRecord gate(const SolveReport& rep, double baseline_mean, const SearchConfig& cfg) {
  HeuristicRecord r;
  r.iterations = rep.iterations;
  r.solve_seed = cfg.solver.seed;
  r.timestamp = utc_timestamp();
  if (rep.status != SolveStatus::Converged || !rep.stability.is_stable)
    r.status = RecordStatus::RejectedUnstable;
  else if (cfg.acceptance == Acceptance::StableAndFaster && !(double(rep.iterations) < baseline_mean))
    r.status = RecordStatus::RejectedSlow;
  else
    r.status = RecordStatus::Accepted;
  return r;
}

} // namespace

HeuristicRecord evaluate_heuristic(std::size_t s, const HeuristicExpression& expr, double baseline_mean,
                                   const SearchConfig& cfg) {
  HeuristicRecord r = gate(solve(s, {expr}, cfg.solver), baseline_mean, cfg);
  r.expression = format_expression(expr);
  return r;
}

HeuristicRecord evaluate_heuristic_set(std::size_t s, const std::vector<HeuristicExpression>& exprs,
                                       const SearchConfig& cfg) {
  check_independent(exprs, s);
  HeuristicRecord r = gate(solve(s, exprs, cfg.solver), cfg.baseline_mean, cfg);
  r.expression = join_expressions(exprs);
  return r;
}

std::uint64_t campaign_solve_seed(std::uint64_t campaign_seed, std::uint64_t evaluation) {
  return derive_seed(campaign_seed ^ 0x5EA7C4u, evaluation);
}

std::vector<HeuristicRecord> discover(std::size_t s, long budget, const SearchConfig& cfg,
                                      const std::function<void(const HeuristicRecord&)>& sink) {
  if (budget < 1) throw UsageError("discovery budget must be at least 1");
  cfg.check();
  RandomStream rng(cfg.seed);
  std::vector<HeuristicRecord> records;
  long evaluations = 0;
  int fresh = 0;
  while (evaluations < budget && fresh < cfg.fallback_limit) {
    HeuristicExpression expr = gen_random_expression(s, rng, cfg.max_terms);
    ++fresh;
    for (int depth = 0;; ++depth) {
      SearchConfig run = cfg;
      run.solver.seed = campaign_solve_seed(cfg.seed, static_cast<std::uint64_t>(evaluations));
      HeuristicRecord rec = evaluate_heuristic(s, expr, cfg.baseline_mean, run);
      rec.mutation_depth = depth;
      ++evaluations;
      if (sink) sink(rec);
      records.push_back(std::move(rec));
      if (records.back().status == RecordStatus::Accepted) break;
      if (evaluations >= budget || depth >= cfg.mutation_limit) break; // fallback
      expr = mutate(expr, s, rng, cfg.max_terms_after_mutation);
    }
  }
  return records;
}

} // namespace esrk
