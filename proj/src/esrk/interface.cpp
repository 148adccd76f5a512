#include "esrk/interface.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "esrk/error.hpp"
#include "esrk/format.hpp"
#include "esrk/heuristics.hpp"
#include "esrk/order_conditions.hpp"

namespace esrk {

using ojson = nlohmann::ordered_json;

namespace {

ojson config_json(const CampaignConfig& c) {
  ojson j;
  j["s"] = c.s;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  ojson& sv = j["solver"];
  sv["tol"] = c.solver.tol;
  sv["max_iter"] = c.solver.max_iter;
  sv["lo"] = c.solver.lo;
  sv["hi"] = c.solver.hi;
  sv["init_scale"] = c.solver.init_scale;
  sv["required_extent"] = c.solver.required_extent;
  sv["stability_samples"] = c.solver.stability_samples;
  sv["penalty_weight"] = c.solver.penalty_weight;
  sv["multistart"] = c.solver.multistart;
  ojson& se = j["search"];
  se["mutation_limit"] = c.search.mutation_limit;
  se["fallback_limit"] = c.search.fallback_limit;
  se["baseline_mean"] = c.search.baseline_mean;
  se["acceptance"] = to_string(c.search.acceptance);
  se["max_terms"] = c.search.max_terms;
  se["max_terms_after_mutation"] = c.search.max_terms_after_mutation;
  ojson& bm = j["benchmarks"];
  bm["problems"] = c.problems;
  bm["steps"] = c.steps;
  return j;
}

template <typename T>
void read_field(const ojson& obj, const char* key, T& out, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError("config field " + where + key + " has the wrong type", 0);
  }
}

void reject_unknown(const ojson& obj, std::initializer_list<const char*> known, const std::string& where) {
  if (!obj.is_object()) throw ParseError("config section " + (where.empty() ? "root" : where) + " must be an object", 0);
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; });
    if (!ok) throw ParseError("unknown config field " + where + it.key(), 0);
  }
}

CampaignConfig config_from_json(const ojson& j) {
  CampaignConfig c;
  reject_unknown(j, {"s", "seed", "output_dir", "solver", "search", "benchmarks"}, "");
  read_field(j, "s", c.s, "");
  read_field(j, "seed", c.seed, "");
  read_field(j, "output_dir", c.output_dir, "");
  if (auto it = j.find("solver"); it != j.end()) {
    const ojson& sv = *it;
    reject_unknown(sv,
                   {"tol", "max_iter", "lo", "hi", "init_scale", "required_extent", "stability_samples",
                    "penalty_weight", "multistart"},
                   "solver.");
    read_field(sv, "tol", c.solver.tol, "solver.");
    read_field(sv, "max_iter", c.solver.max_iter, "solver.");
    read_field(sv, "lo", c.solver.lo, "solver.");
    read_field(sv, "hi", c.solver.hi, "solver.");
    read_field(sv, "init_scale", c.solver.init_scale, "solver.");
    read_field(sv, "required_extent", c.solver.required_extent, "solver.");
    read_field(sv, "stability_samples", c.solver.stability_samples, "solver.");
    read_field(sv, "penalty_weight", c.solver.penalty_weight, "solver.");
    read_field(sv, "multistart", c.solver.multistart, "solver.");
  }
  if (auto it = j.find("search"); it != j.end()) {
    const ojson& se = *it;
    reject_unknown(se,
                   {"mutation_limit", "fallback_limit", "baseline_mean", "acceptance", "max_terms",
                    "max_terms_after_mutation"},
                   "search.");
    read_field(se, "mutation_limit", c.search.mutation_limit, "search.");
    read_field(se, "fallback_limit", c.search.fallback_limit, "search.");
    read_field(se, "baseline_mean", c.search.baseline_mean, "search.");
    std::string acceptance = to_string(c.search.acceptance);
    read_field(se, "acceptance", acceptance, "search.");
    c.search.acceptance = acceptance_from_string(acceptance);
    read_field(se, "max_terms", c.search.max_terms, "search.");
    read_field(se, "max_terms_after_mutation", c.search.max_terms_after_mutation, "search.");
  }
  if (auto it = j.find("benchmarks"); it != j.end()) {
    reject_unknown(*it, {"problems", "steps"}, "benchmarks.");
    read_field(*it, "problems", c.problems, "benchmarks.");
    read_field(*it, "steps", c.steps, "benchmarks.");
  }
  return c;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

ojson stats_json(const RunStatistics& st) {
  ojson j;
  j["count"] = st.count;
  j["failures"] = st.failures;
  j["mean"] = st.mean;
  j["median"] = st.median;
  j["std"] = st.std;
  j["min"] = st.min;
  j["max"] = st.max;
  return j;
}

ojson ipopt_baseline_reference() {
  ojson j;
  j["solver"] = "IPOPT";
  j["count"] = 100;
  j["mean"] = 2010;
  j["median"] = 792;
  j["std"] = 5987;
  j["min"] = 291;
  j["max"] = 55671;
  return j;
}

ojson ipopt_heuristic_reference() {
  ojson j = ojson::array();
  const std::pair<const char*, int> rows[] = {{"a(5,4)=b(8)+b(13)", 1802},
                                              {"b(10)=a(9,8)*b(9)", 1917},
                                              {"b(3)=b(4)+a(1,0)+a(15,14)", 1799},
                                              {"b(5)=a(2,1)^2", 1501},
                                              {"b(1)=a(7,6)+b(12)", 1842}};
  for (const auto& [text, its] : rows) j.push_back({{"expression", text}, {"iterations", its}});
  return j;
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

ojson nullable(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

std::string stem_of(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
  return path.substr(0, dot);
}

} // namespace

// ---------------------------------------------------------------- config

void CampaignConfig::check() const {
  if (s < 2) throw UsageError("s must be at least 2");
  effective_search().check();
  for (const auto& p : problems) make_problem(p);
  for (double h : steps)
    if (!(h > 0.0)) throw UsageError("benchmark steps must be positive");
}

SolveConfig CampaignConfig::effective_solver() const {
  SolveConfig sc = solver;
  sc.seed = seed;
  return sc;
}

SearchConfig CampaignConfig::effective_search() const {
  SearchConfig sc = search;
  sc.solver = effective_solver();
  sc.seed = seed;
  return sc;
}

std::string CampaignConfig::to_text() const { return dump(config_json(*this)); }

CampaignConfig CampaignConfig::from_text(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what(), e.byte);
  }
  return config_from_json(j);
}

CampaignConfig CampaignConfig::load(const std::string& path) { return from_text(read_file(path)); }

void CampaignConfig::set(const std::string& key, const std::string& value) {
  ojson j = config_json(*this);
  ojson* node = &j;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) throw UsageError("unknown config key '" + key + "'");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) throw UsageError("config key '" + key + "' names a section, not a value");
  ojson parsed;
  try {
    parsed = ojson::parse(value);
  } catch (const nlohmann::json::parse_error&) {
    parsed = value;
  }
  if (node->is_array() && !parsed.is_array()) parsed = ojson::array({parsed});
  *node = parsed;
  try {
    *this = config_from_json(j);
  } catch (const ParseError& e) {
    throw UsageError("bad value for " + key + ": " + e.detail());
  }
}

// ---------------------------------------------------------------- tableau documents

TableauDocument parse_tableau_document(const std::string& text) {
  TableauDocument doc;
  try {
    const ojson j = ojson::parse(text);
    if (j.contains("A")) {
      const auto A = j.at("A").get<std::vector<std::vector<double>>>();
      const auto b = j.at("b").get<std::vector<double>>();
      doc.tableau = ButcherTableau(A, b);
      if (j.contains("s") && j.at("s").get<std::size_t>() != b.size())
        throw ParseError("tableau document: s does not match the length of b", 0);
    } else {
      ReducedParameters p;
      p.s = j.at("s").get<std::size_t>();
      p.a_sub = j.at("a_sub").get<std::vector<double>>();
      p.b = j.at("b").get<std::vector<double>>();
      p.check();
      doc.tableau = apply_constraints(p);
      doc.reduced = p;
    }
    if (auto it = j.find("provenance"); it != j.end()) {
      if (it->contains("heuristics")) doc.heuristics = it->at("heuristics").get<std::vector<std::string>>();
      if (it->contains("solver_seed")) doc.solver_seed = it->at("solver_seed").get<std::uint64_t>();
      if (it->contains("timestamp")) doc.timestamp = it->at("timestamp").get<std::string>();
    }
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("tableau document is not valid JSON: ") + e.what(), e.byte);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed tableau document: ") + e.what(), 0);
  } catch (const StructuralError& e) {
    throw ParseError(std::string("malformed tableau document: ") + e.what(), 0);
  }
  return doc;
}

TableauDocument read_tableau_document(const std::string& path) { return parse_tableau_document(read_file(path)); }

std::string format_tableau_document(const ReducedParameters& params, const std::vector<std::string>& heuristics,
                                    std::uint64_t solver_seed, const std::string& timestamp,
                                    const CampaignConfig& cfg) {
  ojson j;
  j["s"] = params.s;
  j["a_sub"] = params.a_sub;
  j["b"] = params.b;
  ojson& pv = j["provenance"];
  pv["heuristics"] = heuristics;
  pv["solver_seed"] = solver_seed;
  pv["timestamp"] = timestamp;
  pv["config"] = config_json(cfg);
  return dump(j);
}

// ---------------------------------------------------------------- certification

Certification certify_tableau(const ButcherTableau& t, const StabilityConfig& sc, double order_tol) {
  Certification c;
  c.order_tol = order_tol;
  c.required_extent = sc.required_extent;
  c.structure = validate_tableau(t);
  c.order = order_residuals(t);
  c.stability = validate_scheme(t, sc);
  c.violations = c.structure;
  for (std::size_t k = 0; k < kOrderConditions; ++k)
    if (!(std::abs(c.order.r[k]) <= order_tol))
      c.violations.push_back(std::string("order condition '") + kOrderConditionNames[k] + "' residual " +
                             sci(c.order.r[k]));
  static const double inv_fact[] = {1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0};
  for (std::size_t j = 0; j < 5; ++j) {
    const double bj = j < c.stability.beta.size() ? c.stability.beta[j] : 0.0;
    if (!(std::abs(bj - inv_fact[j]) <= sc.beta_tol))
      c.violations.push_back("beta_" + std::to_string(j) + " = " + sci(bj) + " differs from 1/" +
                             std::to_string(j) + "!");
  }
  if (c.stability.real_axis_extent < sc.required_extent)
    c.violations.push_back("real-axis extent " + sci(c.stability.real_axis_extent) + " below required " +
                           sci(sc.required_extent));
  return c;
}

std::string format_certification(const Certification& c, const StabilityConfig& sc) {
  ojson j;
  j["stages"] = c.stability.beta.empty() ? 0 : c.stability.beta.size() - 1;
  j["structure"] = c.structure;
  ojson& od = j["order"];
  od["status"] = c.order_pass() ? "PASS" : "FAIL";
  od["tolerance"] = c.order_tol;
  od["max_abs"] = c.order.max_abs();
  for (std::size_t k = 0; k < kOrderConditions; ++k)
    od["residuals"].push_back({{"condition", kOrderConditionNames[k]}, {"residual", c.order.r[k]}});
  ojson& bd = j["beta"];
  bd["status"] = c.beta_pass(sc.beta_tol) ? "PASS" : "FAIL";
  bd["tolerance"] = sc.beta_tol;
  bd["error"] = c.stability.beta_error;
  bd["coefficients"] = c.stability.beta;
  ojson& st = j["stability"];
  st["status"] = c.stability.real_axis_extent >= c.required_extent ? "PASS" : "FAIL";
  st["real_axis_extent"] = c.stability.real_axis_extent;
  st["required_extent"] = c.required_extent;
  st["root_sum"] = c.stability.root_sum ? ojson(*c.stability.root_sum) : ojson(nullptr);
  j["violations"] = c.violations;
  j["result"] = c.pass() ? "PASS" : "FAIL";
  return dump(j);
}

// ---------------------------------------------------------------- store

std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  return dir.back() == '/' ? dir + name : dir + "/" + name;
}

void append_line(const std::string& path, const std::string& line) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot open " + path + " for appending");
  const std::string whole = line + "\n";
  out.write(whole.data(), std::streamsize(whole.size()));
  out.flush();
  if (!out) throw IoError("failed appending to " + path);
}

std::vector<HeuristicRecord> read_store(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<HeuristicRecord> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(parse_record(line));
  return out;
}

double read_baseline_mean(const std::string& stats_path) {
  try {
    const ojson j = ojson::parse(read_file(stats_path));
    return j.at("statistics").at("mean").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(stats_path + " is not a baseline statistics file: " + e.what(), 0);
  }
}

// ---------------------------------------------------------------- commands

CommandResult cmd_baseline(long runs, const CampaignConfig& cfg) {
  if (runs < 1) throw UsageError("baseline needs --runs >= 1");
  cfg.check();
  const auto reports = run_baseline(cfg.s, std::size_t(runs), cfg.effective_solver());
  const RunStatistics st = run_statistics(reports);
  write_run_dump(reports, join_path(cfg.output_dir, kBaselineDumpFile));

  ojson j;
  j["runs"] = runs;
  j["statistics"] = stats_json(st);
  j["dump"] = kBaselineDumpFile;
  j["ipopt_reference"] = ipopt_baseline_reference();
  j["config"] = config_json(cfg);
  const std::string text = dump(j);
  write_file(join_path(cfg.output_dir, kBaselineStatsFile), text);
  return {st.count > 0 ? 0 : 1, text};
}

CommandResult cmd_discover(long budget, const CampaignConfig& cfg) {
  if (budget < 1) throw UsageError("discover needs --budget >= 1");
  cfg.check();
  const SearchConfig sc = cfg.effective_search();
  if (sc.acceptance == Acceptance::StableAndFaster && !(sc.baseline_mean > 0.0))
    throw UsageError("StableAndFaster acceptance needs search.baseline_mean > 0");

  const std::string store = join_path(cfg.output_dir, kStoreFile);
  write_file(store, "");
  const auto records = discover(cfg.s, budget, sc, [&](const HeuristicRecord& r) { append_line(store, format_record(r)); });

  std::size_t accepted = 0, unstable = 0, slow = 0;
  std::vector<const HeuristicRecord*> acc;
  for (const auto& r : records) {
    switch (r.status) {
    case RecordStatus::Accepted: ++accepted; acc.push_back(&r); break;
    case RecordStatus::RejectedUnstable: ++unstable; break;
    case RecordStatus::RejectedSlow: ++slow; break;
    }
  }
  std::stable_sort(acc.begin(), acc.end(), [](auto* a, auto* b) { return a->iterations < b->iterations; });

  ojson j;
  j["budget"] = budget;
  j["evaluations"] = records.size();
  j["accepted"] = accepted;
  j["rejected_unstable"] = unstable;
  j["rejected_slow"] = slow;
  j["baseline_mean"] = sc.baseline_mean > 0.0 ? ojson(sc.baseline_mean) : ojson(nullptr);
  ojson& rows = j["accepted_heuristics"] = ojson::array();
  for (const auto* r : acc) {
    ojson row;
    row["expression"] = r->expression;
    row["iterations"] = r->iterations;
    row["mutation_depth"] = r->mutation_depth;
    row["solve_seed"] = r->solve_seed;
    row["change_vs_baseline"] =
        sc.baseline_mean > 0.0 ? ojson((double(r->iterations) - sc.baseline_mean) / sc.baseline_mean) : ojson(nullptr);
    rows.push_back(row);
  }
  j["store"] = kStoreFile;
  j["ipopt_reference"] = {{"baseline_mean", 2010}, {"heuristics", ipopt_heuristic_reference()}};
  j["config"] = config_json(cfg);
  const std::string text = dump(j);
  write_file(join_path(cfg.output_dir, kDiscoverReportFile), text);
  return {0, text};
}

CommandResult cmd_solve(const std::vector<std::string>& heuristic_texts, const CampaignConfig& cfg,
                        const std::string& tableau_path) {
  cfg.check();
  std::vector<HeuristicExpression> exprs;
  for (const auto& text : heuristic_texts) {
    try {
      for (auto& e : parse_expression_list(text, cfg.s)) exprs.push_back(std::move(e));
    } catch (const ParseError& e) {
      throw ParseError("heuristic '" + text + "': " + e.detail(), e.position());
    }
  }
  std::vector<std::string> canonical;
  for (const auto& e : exprs) canonical.push_back(format_expression(e));

  const SolveConfig sc = cfg.effective_solver();
  const SolveReport rep = solve(cfg.s, exprs, sc);
  const std::string path = tableau_path.empty() ? join_path(cfg.output_dir, "tableau.json") : tableau_path;

  ojson j;
  j["status"] = to_string(rep.status);
  j["iterations"] = rep.iterations;
  j["starts"] = rep.starts;
  j["free_dimension"] = rep.free_dimension;
  j["residual_norm"] = rep.residual_norm;
  j["max_order_violation"] = rep.max_order_violation;
  j["beta_error"] = rep.stability.beta_error;
  j["real_axis_extent"] = rep.stability.real_axis_extent;
  j["heuristics"] = canonical;
  j["seed"] = rep.seed;
  j["wall_time"] = rep.wall_time;
  if (rep.status == SolveStatus::Converged) {
    write_file(path, format_tableau_document(*rep.params, canonical, rep.seed, utc_timestamp(), cfg));
    j["tableau"] = path;
  } else {
    j["tableau"] = nullptr;
  }
  j["config"] = config_json(cfg);
  return {rep.status == SolveStatus::Converged ? 0 : 1, dump(j)};
}

CommandResult cmd_validate(const std::string& tableau_path, const CampaignConfig& cfg, const std::string& grid_path) {
  const TableauDocument doc = read_tableau_document(tableau_path);
  const StabilityConfig sc = cfg.effective_solver().stability();
  const Certification c = certify_tableau(doc.tableau, sc);
  if (!grid_path.empty()) {
    const double reach = std::max(4.0, 1.25 * c.stability.real_axis_extent);
    const double half = std::max(4.0, 0.5 * reach);
    write_grid_csv(stability_grid(doc.tableau, -reach, 2.0, -half, half, 201, 201), grid_path);
  }
  return {c.pass() ? 0 : 1, format_certification(c, sc)};
}

CommandResult cmd_converge(const std::string& tableau_path, const std::string& problem_name, const CampaignConfig& cfg,
                           const std::string& study_path) {
  const IVProblem problem = make_problem(problem_name);
  const TableauDocument doc = read_tableau_document(tableau_path);
  const std::vector<double> grid = cfg.steps.empty() ? problem.suggested_steps : cfg.steps;
  for (double h : grid)
    if (!(h > 0.0)) throw UsageError("benchmark steps must be positive");

  const ConvergenceStudy st = doc.reduced ? run_convergence_study(*doc.reduced, problem, grid)
                                         : run_convergence_study(doc.tableau, problem, grid);
  const std::string csv = study_path.empty() ? join_path(cfg.output_dir, problem_name + "_study.csv") : study_path;
  write_study_csv(st, csv);

  ojson j;
  j["problem"] = problem.id;
  j["fitted_slope"] = nullable(st.fitted_slope);
  j["included_points"] = st.steps.size();
  j["reference"] = st.reference;
  j["low_storage"] = doc.reduced.has_value();
  ojson& params = j["parameters"];
  for (const auto& [k, v] : problem.parameters) params[k] = v;
  j["notes"] = problem.notes;
  ojson& pts = j["points"] = ojson::array();
  for (const auto& p : st.points) {
    ojson row;
    row["h"] = p.h;
    row["steps"] = p.steps;
    row["error"] = nullable(p.error);
    row["excluded"] = p.excluded.empty() ? ojson(nullptr) : ojson(p.excluded);
    pts.push_back(row);
  }
  j["table"] = csv;
  j["config"] = config_json(cfg);
  const std::string text = dump(j);
  write_file(stem_of(csv) + ".json", text);
  return {std::isfinite(st.fitted_slope) ? 0 : 1, text};
}

CommandResult cmd_stability(const std::string& tableau_path, const GridSpec& g, const CampaignConfig& cfg,
                            const std::string& grid_path) {
  if (g.nx < 2 || g.ny < 2) throw UsageError("stability grid needs at least 2 points per axis");
  if (!(g.re_min < g.re_max) || !(g.im_min < g.im_max)) throw UsageError("stability grid ranges must be increasing");
  const TableauDocument doc = read_tableau_document(tableau_path);
  const StabilityConfig sc = cfg.effective_solver().stability();
  const StabilityReport rep = validate_scheme(doc.tableau, sc);
  write_grid_csv(stability_grid(doc.tableau, g.re_min, g.re_max, g.im_min, g.im_max, g.nx, g.ny), grid_path);

  ojson j;
  j["beta"] = rep.beta;
  j["beta_error"] = rep.beta_error;
  j["real_axis_extent"] = rep.real_axis_extent;
  j["root_sum"] = rep.root_sum ? ojson(*rep.root_sum) : ojson(nullptr);
  j["is_stable"] = rep.is_stable;
  j["grid"] = {{"path", grid_path}, {"re", {g.re_min, g.re_max}}, {"im", {g.im_min, g.im_max}},
               {"nx", g.nx}, {"ny", g.ny}};
  j["config"] = config_json(cfg);
  return {0, dump(j)};
}

} // namespace esrk
