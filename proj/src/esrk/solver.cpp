#include "esrk/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include <Eigen/Dense>

#include "esrk/error.hpp"
#include "esrk/format.hpp"
#include "esrk/order_conditions.hpp"
#include "esrk/reduced_model.hpp"

namespace esrk {

void SolveConfig::check() const {
  if (!(tol > 0.0)) throw UsageError("solver tol must be positive");
  if (!(lo < hi)) throw UsageError("solver bounds need lo < hi");
  if (max_iter < 1) throw UsageError("solver max_iter must be at least 1");
  if (multistart < 1) throw UsageError("solver multistart must be at least 1");
  if (required_extent < 0.0) throw UsageError("required_extent must be non-negative");
  if (penalty_weight < 0.0) throw UsageError("penalty_weight must be non-negative");
}

StabilityConfig SolveConfig::stability() const {
  StabilityConfig sc;
  sc.required_extent = required_extent;
  return sc;
}

const char* to_string(SolveStatus s) {
  switch (s) {
  case SolveStatus::Converged: return "Converged";
  case SolveStatus::BudgetExhausted: return "BudgetExhausted";
  case SolveStatus::Infeasible: return "Infeasible";
  }
  return "?";
}

SolveStatus solve_status_from_string(const std::string& text) {
  if (text == "Converged") return SolveStatus::Converged;
  if (text == "BudgetExhausted") return SolveStatus::BudgetExhausted;
  if (text == "Infeasible") return SolveStatus::Infeasible;
  throw ParseError("unknown solve status '" + text + "'", 0);
}

ReducedParameters initial_point(std::size_t s, const SolveConfig& cfg, RandomStream& rng) {
  const double scale = cfg.init_scale > 0.0 ? cfg.init_scale : 1.0 / double(s);
  std::vector<double> flat(2 * s - 1);
  for (double& v : flat) v = rng.uniform_open(0.0, scale);
  return ReducedParameters::from_flat(s, flat);
}

namespace {

constexpr std::size_t kBetaChecked = 5;
constexpr double kMuInit = 1e-3;
constexpr double kMuMin = 1e-12;
constexpr double kMuMax = 1e16;

// Stacked residual: order conditions, beta_0..beta_4, stability hinges.
class Problem {
public:
  Problem(std::size_t s, const std::vector<HeuristicExpression>& exprs, const SolveConfig& cfg)
      : s_(s), exprs_(exprs), free_(free_positions(s, exprs)), weight_(std::sqrt(cfg.penalty_weight)) {
    if (cfg.required_extent > 0.0 && cfg.stability_samples > 0)
      for (std::size_t m = 1; m <= cfg.stability_samples; ++m)
        points_.push_back(cfg.required_extent * double(m) / double(cfg.stability_samples));
  }

  std::size_t n() const { return free_.size(); }
  std::size_t rows() const { return kOrderConditions + kBetaChecked + points_.size(); }
  const std::vector<std::size_t>& free() const { return free_; }
  void add_point(double x) { points_.push_back(x); }

  double value(const Eigen::VectorXd& theta) const {
    const auto model = make_model(s_, as_vec(theta), free_, exprs_);
    double phi = 0.0;
    for (double r : model.order_residuals()) phi += r * r;
    const auto beta = model.beta(kBetaChecked);
    for (std::size_t j = 0; j < kBetaChecked; ++j) {
      const double d = beta[j] - inv_factorial(j);
      phi += d * d;
    }
    for (double x : points_) {
      const double h = weight_ * std::max(0.0, std::abs(model.stability_at(-x)) - 1.0);
      phi += h * h;
    }
    return phi;
  }

  void linearize(const Eigen::VectorXd& theta, Eigen::VectorXd& F, Eigen::MatrixXd& J) const {
    const auto values = as_vec(theta);
    const auto dual = make_dual_model(s_, values, free_, exprs_);
    const auto plain = make_model(s_, values, free_, exprs_);
    F.setZero(Eigen::Index(rows()));
    J.setZero(Eigen::Index(rows()), Eigen::Index(n()));
    std::size_t row = 0;
    auto put = [&](const Dual& d, double shift, double scale) {
      F[Eigen::Index(row)] = scale * (d.v - shift);
      for (std::size_t m = 0; m < d.width; ++m) J(Eigen::Index(row), Eigen::Index(m)) = scale * d.g[m];
      ++row;
    };
    for (const Dual& r : dual.order_residuals()) put(r, 0.0, 1.0);
    const auto beta = dual.beta(kBetaChecked);
    for (std::size_t j = 0; j < kBetaChecked; ++j) put(beta[j], inv_factorial(j), 1.0);
    for (double x : points_) {
      // Inactive hinges contribute a zero row; only active ones need derivatives.
      const double r = plain.stability_at(-x);
      if (std::abs(r) <= 1.0) {
        ++row;
        continue;
      }
      Dual d = dual.stability_at(-x);
      if (d.v < 0.0) d = -d;
      put(d, 1.0, weight_);
    }
  }

  std::vector<double> as_vec(const Eigen::VectorXd& theta) const { return {theta.data(), theta.data() + theta.size()}; }

  ReducedParameters full(const Eigen::VectorXd& theta) const {
    return ReducedParameters::from_flat(s_, make_model(s_, as_vec(theta), free_, exprs_).flat());
  }

  /// Points in [0, extent] where |R(-x)| > 1, worst first, on a fine scan.
  std::vector<double> violations(const Eigen::VectorXd& theta, double extent, std::size_t scan) const {
    const auto model = make_model(s_, as_vec(theta), free_, exprs_);
    std::vector<std::pair<double, double>> bad;
    for (std::size_t k = 1; k <= scan; ++k) {
      const double x = extent * double(k) / double(scan);
      const double excess = std::abs(model.stability_at(-x)) - 1.0;
      if (excess > 0.0) bad.emplace_back(excess, x);
    }
    std::sort(bad.begin(), bad.end(), [](auto& a, auto& b) { return a.first > b.first; });
    std::vector<double> out;
    for (std::size_t k = 0; k < bad.size() && k < 16; ++k) out.push_back(bad[k].second);
    return out;
  }

private:
  static double inv_factorial(std::size_t j) {
    double f = 1.0;
    for (std::size_t k = 2; k <= j; ++k) f *= double(k);
    return 1.0 / f;
  }

  std::size_t s_;
  std::vector<HeuristicExpression> exprs_;
  std::vector<std::size_t> free_;
  double weight_;
  std::vector<double> points_;
};

struct StartOutcome {
  SolveStatus status;
  long iterations;
  double phi;
  Eigen::VectorXd theta;
};

Eigen::VectorXd project(Eigen::VectorXd theta, const SolveConfig& cfg) {
  for (Eigen::Index k = 0; k < theta.size(); ++k) theta[k] = std::clamp(theta[k], cfg.lo, cfg.hi);
  return theta;
}

// Independent certification: full tableau, nested-loop residuals, stability module.
bool certify(const ReducedParameters& p, const SolveConfig& cfg, SolveReport& rep) {
  const ButcherTableau t = apply_constraints(p);
  rep.max_order_violation = order_residuals(t).max_abs();
  rep.stability = validate_scheme(t, cfg.stability());
  return rep.max_order_violation <= cfg.order_acceptance() && rep.stability.is_stable;
}

StartOutcome run_start(Problem& problem, Eigen::VectorXd theta, long budget, const SolveConfig& cfg,
                       SolveReport& rep) {
  const std::size_t n = problem.n();
  Eigen::VectorXd F;
  Eigen::MatrixXd J;
  double mu = kMuInit;
  long iterations = 0;
  int refinements = 0;
  for (;;) {
    problem.linearize(theta, F, J);
    const double phi = F.squaredNorm();
    if (phi <= cfg.tol * cfg.tol * double(problem.rows())) {
      if (certify(problem.full(theta), cfg, rep)) return {SolveStatus::Converged, iterations, phi, theta};
      // The sampled hinge missed part of the interval: add the worst offenders
      // and keep iterating.
      auto extra = problem.violations(theta, cfg.required_extent, 16 * std::max<std::size_t>(cfg.stability_samples, 64));
      if (extra.empty() || ++refinements > 64) return {SolveStatus::Infeasible, iterations, phi, theta};
      for (double x : extra) problem.add_point(x);
      continue;
    }
    if (iterations >= budget) return {SolveStatus::BudgetExhausted, iterations, phi, theta};

    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * F;
    for (;;) {
      Eigen::MatrixXd M = JtJ;
      M.diagonal().array() += mu;
      const Eigen::VectorXd step = M.ldlt().solve(-g);
      const Eigen::VectorXd trial = project(theta + step, cfg);
      const double trial_phi = problem.value(trial);
      if (std::isfinite(trial_phi) && trial_phi < phi) {
        theta = trial;
        mu = std::max(mu * 0.3, kMuMin);
        ++iterations;
        break;
      }
      mu *= 10.0;
      if (mu > kMuMax || step.norm() < 1e-300) return {SolveStatus::Infeasible, iterations, phi, theta};
    }
    (void)n;
  }
}

} // namespace

SolveReport solve(std::size_t s, const std::vector<HeuristicExpression>& exprs, const SolveConfig& cfg) {
  cfg.check();
  if (s < 1) throw UsageError("stage count must be positive");
  check_independent(exprs, s);
  const auto t0 = std::chrono::steady_clock::now();

  SolveReport rep;
  rep.seed = cfg.seed;
  Problem problem(s, exprs, cfg);
  rep.free_dimension = static_cast<int>(problem.n());

  long remaining = cfg.max_iter;
  StartOutcome last{SolveStatus::Infeasible, 0, 0.0, {}};
  for (int start = 0; start < cfg.multistart && remaining > 0; ++start) {
    RandomStream rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(start)));
    const std::vector<double> flat = initial_point(s, cfg, rng).flat();
    Eigen::VectorXd theta(Eigen::Index(problem.n()));
    for (std::size_t m = 0; m < problem.n(); ++m) theta[Eigen::Index(m)] = flat[problem.free()[m]];
    theta = project(theta, cfg);

    Problem local = problem;
    last = run_start(local, theta, remaining, cfg, rep);
    rep.iterations += last.iterations;
    remaining -= last.iterations;
    rep.starts = start + 1;
    if (last.status == SolveStatus::Converged) break;
  }

  rep.status = last.status;
  rep.residual_norm = std::sqrt(last.phi);
  if (last.theta.size() == Eigen::Index(problem.n())) {
    rep.params = problem.full(last.theta);
    if (rep.status == SolveStatus::Converged) {
      rep.tableau = apply_constraints(*rep.params);
    } else {
      certify(*rep.params, cfg, rep);
    }
  }
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

RunStatistics iteration_statistics(const std::vector<long>& its, std::size_t failures) {
  RunStatistics st;
  st.failures = failures;
  st.count = its.size();
  if (its.empty()) return st;
  std::vector<long> sorted = its;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (long v : sorted) sum += double(v);
  st.mean = sum / double(sorted.size());
  const std::size_t mid = sorted.size() / 2;
  st.median = sorted.size() % 2 ? double(sorted[mid]) : 0.5 * (double(sorted[mid - 1]) + double(sorted[mid]));
  st.min = double(sorted.front());
  st.max = double(sorted.back());
  if (sorted.size() > 1) {
    double ss = 0.0;
    for (long v : sorted) ss += (double(v) - st.mean) * (double(v) - st.mean);
    st.std = std::sqrt(ss / double(sorted.size() - 1));
  }
  return st;
}

RunStatistics run_statistics(const std::vector<SolveReport>& reports) {
  if (reports.empty()) throw UsageError("run_statistics needs at least one report");
  std::vector<long> its;
  std::size_t failures = 0;
  for (const auto& r : reports) {
    if (r.status == SolveStatus::Converged)
      its.push_back(r.iterations);
    else
      ++failures;
  }
  return iteration_statistics(its, failures);
}

void write_run_dump(const std::vector<SolveReport>& reports, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "seed,status,iterations,residual_norm,wall_time\n";
  for (const auto& r : reports)
    out << r.seed << ',' << to_string(r.status) << ',' << r.iterations << ',' << sci(r.residual_norm) << ','
        << sci(r.wall_time) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

} // namespace esrk
