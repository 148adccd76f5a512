#include "esrk/benchmarks.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "esrk/error.hpp"
#include "esrk/format.hpp"
#include "esrk/parallel.hpp"
#include "esrk/stability.hpp"

namespace esrk {

// ---------------------------------------------------------------- steppers

GenericStepper::GenericStepper(ButcherTableau tableau, std::size_t dimension)
    : t_(std::move(tableau)), k_(t_.stages(), std::vector<double>(dimension)), stage_(dimension) {}

void GenericStepper::step(const RhsFunction& f, double tn, double h, std::span<double> y) {
  const std::size_t s = t_.stages();
  const std::size_t dim = y.size();
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t e = 0; e < dim; ++e) {
      double acc = 0.0;
      for (std::size_t j = 0; j < i; ++j) acc += t_.a(i, j) * k_[j][e];
      stage_[e] = y[e] + h * acc;
    }
    f(tn + t_.c()[i] * h, stage_, k_[i]);
  }
  for (std::size_t e = 0; e < dim; ++e) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s; ++i) acc += t_.b()[i] * k_[i][e];
    y[e] += h * acc;
  }
}

std::vector<double> rk_step(const ButcherTableau& t, const IVProblem& problem, double tn,
                            std::span<const double> yn, double h) {
  std::vector<double> y(yn.begin(), yn.end());
  GenericStepper(t, y.size()).step(problem.rhs, tn, h, y);
  return y;
}

LowStorageStepper::LowStorageStepper(const ReducedParameters& params, std::size_t dimension)
    : p_(params), c_(params.s, 0.0), stage_(dimension), deriv_(dimension) {
  p_.check();
  double prefix = 0.0;
  for (std::size_t i = 1; i < p_.s; ++i) {
    if (i >= 2) prefix += p_.b[i - 2];
    c_[i] = prefix + p_.a_sub[i - 1];
  }
}

void LowStorageStepper::step(const RhsFunction& f, double tn, double h, std::span<double> y) {
  const std::size_t dim = y.size();
  std::copy(y.begin(), y.end(), stage_.begin());
  for (std::size_t i = 0; i < p_.s; ++i) {
    f(tn + c_[i] * h, stage_, deriv_);
    const double hb = h * p_.b[i];
    if (i + 1 < p_.s) {
      // Next stage argument uses the accumulator before b_i k_i is added.
      const double ha = h * p_.a_sub[i];
      for (std::size_t e = 0; e < dim; ++e) {
        stage_[e] = y[e] + ha * deriv_[e];
        y[e] += hb * deriv_[e];
      }
    } else {
      for (std::size_t e = 0; e < dim; ++e) y[e] += hb * deriv_[e];
    }
  }
}

std::vector<double> low_storage_step(const ReducedParameters& params, const IVProblem& problem, double tn,
                                     std::span<const double> yn, double h) {
  std::vector<double> y(yn.begin(), yn.end());
  LowStorageStepper(params, y.size()).step(problem.rhs, tn, h, y);
  return y;
}

std::vector<double> integrate(const ButcherTableau& t, const IVProblem& problem, double h, long steps) {
  std::vector<double> y = problem.y0;
  GenericStepper stepper(t, y.size());
  for (long n = 0; n < steps; ++n) stepper.step(problem.rhs, problem.t0 + double(n) * h, h, y);
  return y;
}

std::vector<double> integrate_low_storage(const ReducedParameters& params, const IVProblem& problem, double h,
                                          long steps) {
  std::vector<double> y = problem.y0;
  LowStorageStepper stepper(params, y.size());
  for (long n = 0; n < steps; ++n) stepper.step(problem.rhs, problem.t0 + double(n) * h, h, y);
  return y;
}

// ---------------------------------------------------------------- problems

IVProblem brusselator_1d(const Brusselator1DParams& p) {
  IVProblem prob;
  prob.id = "brusselator1d";
  prob.dimension = 2;
  prob.y0 = {p.a0, p.b0};
  prob.t1 = p.t1;
  prob.rhs = [k1 = p.k1, k2 = p.k2](double, std::span<const double> y, std::span<double> dy) {
    const double a2b = y[0] * y[0] * y[1];
    dy[0] = k1 - (k2 + 1.0) * y[0] + a2b;
    dy[1] = k2 * y[0] - a2b;
  };
  prob.suggested_steps = default_step_grid();
  prob.parameters = {{"k1", p.k1}, {"k2", p.k2}, {"A0", p.a0}, {"B0", p.b0}, {"t1", p.t1}};
  return prob;
}

void laplacian_5pt(std::span<const double> f, std::size_t n, double dx, std::span<double> out) {
  const double inv = 1.0 / (dx * dx);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = f.data() + i * n;
    const double* above = f.data() + (i == 0 ? n - 1 : i - 1) * n;
    const double* below = f.data() + (i + 1 == n ? 0 : i + 1) * n;
    double* dst = out.data() + i * n;
    dst[0] = (above[0] + below[0] + row[n - 1] + row[1] - 4.0 * row[0]) * inv;
    for (std::size_t j = 1; j + 1 < n; ++j)
      dst[j] = (above[j] + below[j] + row[j - 1] + row[j + 1] - 4.0 * row[j]) * inv;
    dst[n - 1] = (above[n - 1] + below[n - 1] + row[n - 2] + row[0] - 4.0 * row[n - 1]) * inv;
  }
}

IVProblem brusselator_2d(const Brusselator2DParams& p) {
  if (p.grid_n < 4) throw UsageError("brusselator2d needs grid_n >= 4");
  const std::size_t n = p.grid_n, cells = n * n;
  const double dx = 1.0 / double(n);
  IVProblem prob;
  prob.id = "brusselator2d";
  prob.dimension = 2 * cells;
  prob.t1 = p.t1;
  prob.y0.assign(2 * cells, p.initial_value);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      prob.y0[i * n + j] += p.perturbation_amplitude * std::sin(two_pi * double(j) * dx) * std::sin(two_pi * double(i) * dx);
  prob.rhs = [p, n, cells, dx](double, std::span<const double> y, std::span<double> dy) {
    const auto u = y.subspan(0, cells), v = y.subspan(cells, cells);
    auto du = dy.subspan(0, cells), dv = dy.subspan(cells, cells);
    laplacian_5pt(u, n, dx, du);
    laplacian_5pt(v, n, dx, dv);
    for (std::size_t k = 0; k < cells; ++k) {
      const double u2v = u[k] * u[k] * v[k];
      du[k] = p.du * du[k] + p.a - (p.b + 1.0) * u[k] + u2v;
      dv[k] = p.dv * dv[k] + p.b * u[k] - u2v;
    }
  };
  prob.stiff_eigenvalue = -8.0 * std::max(p.du, p.dv) / (dx * dx) - (p.b + 1.0);
  prob.suggested_steps = geometric_steps(0.02, 0.004, 8);
  prob.parameters = {{"Du", p.du}, {"Dv", p.dv}, {"A", p.a}, {"B", p.b}, {"grid_n", double(n)},
                     {"perturbation_amplitude", p.perturbation_amplitude}, {"initial_value", p.initial_value},
                     {"t1", p.t1}};
  prob.notes = "unit square, periodic boundaries, 5-point Laplacian, u0 = v0 = initial_value plus "
               "perturbation_amplitude*sin(2 pi x)*sin(2 pi y) on u";
  return prob;
}

std::vector<double> spectral_d1(std::size_t n) {
  const double h = 2.0 * std::numbers::pi / double(n);
  std::vector<double> d(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) {
      if (j == k) continue;
      const long diff = long(j) - long(k);
      const double sign = (diff % 2 == 0) ? 1.0 : -1.0;
      d[j * n + k] = 0.5 * sign / std::tan(double(diff) * h / 2.0);
    }
  return d;
}

std::vector<double> spectral_d2(std::size_t n) {
  const double h = 2.0 * std::numbers::pi / double(n);
  std::vector<double> d(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) {
      if (j == k) {
        d[j * n + k] = -std::numbers::pi * std::numbers::pi / (3.0 * h * h) - 1.0 / 6.0;
        continue;
      }
      const long diff = long(j) - long(k);
      const double sign = (diff % 2 == 0) ? 1.0 : -1.0;
      const double sn = std::sin(double(diff) * h / 2.0);
      d[j * n + k] = -0.5 * sign / (sn * sn);
    }
  return d;
}

namespace {

// out = D applied along x (within rows) + D applied along y (within columns).
void apply_xy(const std::vector<double>& dx_op, const std::vector<double>& dy_op, std::span<const double> fx,
              std::span<const double> fy, std::size_t n, std::span<double> out) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += dx_op[j * n + k] * fx[i * n + k];
      for (std::size_t k = 0; k < n; ++k) acc += dy_op[i * n + k] * fy[k * n + j];
      out[i * n + j] = acc;
    }
}

} // namespace

std::vector<double> spectral_divergence(std::span<const double> state, std::size_t n) {
  const auto d1 = spectral_d1(n);
  std::vector<double> out(n * n);
  apply_xy(d1, d1, state.subspan(0, n * n), state.subspan(n * n, n * n), n, out);
  return out;
}

IVProblem stokes_problem(const StokesParams& p) {
  if (p.grid_n < 4 || p.grid_n % 2) throw UsageError("stokes needs an even grid_n >= 4");
  const std::size_t n = p.grid_n, cells = n * n;
  const double h = 2.0 * std::numbers::pi / double(n);
  std::vector<double> u0(2 * cells);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double x = double(j) * h, y = double(i) * h;
      u0[i * n + j] = std::sin(x) * std::cos(y);
      u0[cells + i * n + j] = -std::cos(x) * std::sin(y);
    }
  IVProblem prob;
  prob.id = "stokes";
  prob.dimension = 2 * cells;
  prob.t1 = p.t1;
  prob.y0 = u0;
  // Taylor-Green data is divergence free and an eigenfunction of the Laplacian,
  // so the pressure gradient vanishes and each component decays as exp(-2 nu t).
  prob.rhs = [d2 = spectral_d2(n), nu = p.nu, n, cells](double, std::span<const double> y, std::span<double> dy) {
    for (std::size_t c = 0; c < 2; ++c) {
      const auto f = y.subspan(c * cells, cells);
      auto out = dy.subspan(c * cells, cells);
      apply_xy(d2, d2, f, f, n, out);
      for (double& v : out) v *= nu;
    }
  };
  prob.exact = [u0, nu = p.nu](double t) {
    std::vector<double> u = u0;
    const double decay = std::exp(-2.0 * nu * t);
    for (double& v : u) v *= decay;
    return u;
  };
  const auto d2 = spectral_d2(n);
  double nyquist = 0.0; // eigenvalue of the alternating mode, the most negative one
  for (std::size_t k = 0; k < n; ++k) nyquist += d2[k] * ((k % 2) ? -1.0 : 1.0);
  prob.stiff_eigenvalue = 2.0 * p.nu * nyquist;
  prob.suggested_steps = geometric_steps(0.1, 0.01, 10);
  prob.parameters = {{"nu", p.nu}, {"grid_n", double(n)}, {"t1", p.t1}};
  prob.notes = "periodic [0,2pi]^2, Taylor-Green initial velocity, Fourier-spectral Laplacian, exact decay reference";
  return prob;
}

const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names{"brusselator1d", "brusselator2d", "stokes"};
  return names;
}

IVProblem make_problem(const std::string& name) {
  if (name == "brusselator1d") return brusselator_1d();
  if (name == "brusselator2d") return brusselator_2d();
  if (name == "stokes") return stokes_problem();
  throw UsageError("unknown problem '" + name + "'; expected one of brusselator1d, brusselator2d, stokes");
}

// ---------------------------------------------------------------- errors and orders

double l2_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw StructuralError("l2_error: shapes differ or are empty");
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(ss / double(a.size()));
}

double l2_error(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
  if (a.size() != b.size() || a.empty()) throw StructuralError("l2_error: sequence lengths differ or are empty");
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) throw StructuralError("l2_error: state shapes differ");
    for (std::size_t k = 0; k < a[i].size(); ++k) ss += (a[i][k] - b[i][k]) * (a[i][k] - b[i][k]);
  }
  return std::sqrt(ss / double(a.size()));
}

double convergence_order(double e1, double e2, double h1, double h2) {
  if (!(e1 > 0 && e2 > 0 && h1 > 0 && h2 > 0) || h1 == h2)
    throw UsageError("convergence_order needs positive errors and distinct positive steps");
  return std::log(e1 / e2) / std::log(h1 / h2);
}

std::vector<double> geometric_steps(double h_max, double h_min, std::size_t count) {
  std::vector<double> out;
  for (std::size_t k = 0; k < count; ++k)
    out.push_back(count == 1 ? h_max : h_max * std::pow(h_min / h_max, double(k) / double(count - 1)));
  return out;
}

std::vector<double> arithmetic_steps(double h_max, double h_min, std::size_t count) {
  std::vector<double> out;
  for (std::size_t k = 0; k < count; ++k)
    out.push_back(count == 1 ? h_max : h_max + (h_min - h_max) * double(k) / double(count - 1));
  return out;
}

std::vector<double> default_step_grid() { return geometric_steps(0.1, 0.001, 20); }

double fitted_slope(const std::vector<double>& h, const std::vector<double>& e) {
  if (h.size() != e.size() || h.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    mx += std::log(h[k]);
    my += std::log(e[k]);
  }
  mx /= double(h.size());
  my /= double(h.size());
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double dx = std::log(h[k]) - mx;
    sxy += dx * (std::log(e[k]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

// ---------------------------------------------------------------- studies

namespace {

using Integrator = std::function<std::vector<double>(const IVProblem&, double, long)>;

ConvergenceStudy study(const ButcherTableau& t, const Integrator& integrate_fn, const IVProblem& problem,
                       const std::vector<double>& grid, const StudyOptions& opt) {
  const double span = problem.t1 - problem.t0;
  if (!(span > 0.0)) throw UsageError("convergence study needs t1 > t0");

  // Snap every step so that the final time is an integer number of steps.
  std::vector<StudyPoint> pts;
  for (double h : grid) {
    if (!(h > 0.0)) throw UsageError("step sizes must be positive");
    const long n = std::max(1L, std::lround(span / h));
    bool seen = false;
    for (const auto& p : pts) seen |= p.steps == n;
    if (!seen) pts.push_back({span / double(n), n, 0.0, {}});
  }
  std::sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.h > b.h; });

  const std::vector<double> beta = stability_coefficients(t);
  if (problem.stiff_eigenvalue) {
    for (auto& p : pts)
      if (std::abs(evaluate_polynomial(beta, *problem.stiff_eigenvalue * p.h)) > 1.0 + opt.stab_tol)
        p.excluded = "unstable step";
  }

  ConvergenceStudy out;
  out.problem_id = problem.id;
  std::vector<double> ref;
  long ref_steps = 0;
  if (problem.exact) {
    ref = problem.exact(problem.t1);
    out.reference = "exact";
  } else {
    double h_min = pts.back().h;
    for (const auto& p : pts)
      if (p.excluded.empty()) h_min = std::min(h_min, p.h);
    const long n_ref = static_cast<long>(std::ceil(span / (h_min / opt.reference_factor)));
    ref = integrate_fn(problem, span / double(n_ref), n_ref);
    ref_steps = n_ref;
    out.reference = "numeric h=" + sci(span / double(n_ref));
  }

  parallel_for(pts.size(), [&](std::size_t k) {
    auto& p = pts[k];
    if (!p.excluded.empty()) {
      p.error = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    const auto y = integrate_fn(problem, p.h, p.steps);
    p.error = l2_error(y, ref);
    if (!std::isfinite(p.error)) p.excluded = "divergent";
  });

  double ref_rms = 0.0;
  for (double v : ref) ref_rms += v * v;
  ref_rms = std::sqrt(ref_rms / double(ref.size()));
  for (auto& p : pts) {
    if (!p.excluded.empty()) continue;
    // Accumulated round-off of the measured run plus that of a numeric reference.
    const double floor = opt.floor_factor * std::numeric_limits<double>::epsilon() * std::max(1.0, ref_rms) *
                         (std::sqrt(double(p.steps)) + std::sqrt(double(ref_steps)));
    if (p.error <= floor) p.excluded = "round-off floor";
  }

  for (const auto& p : pts) {
    if (!p.excluded.empty()) continue;
    out.steps.push_back(p.h);
    out.errors.push_back(p.error);
  }
  for (std::size_t k = 1; k < out.steps.size(); ++k)
    out.pairwise_orders.push_back(convergence_order(out.errors[k - 1], out.errors[k], out.steps[k - 1], out.steps[k]));
  out.fitted_slope = fitted_slope(out.steps, out.errors);
  out.points = std::move(pts);
  return out;
}

} // namespace

ConvergenceStudy run_convergence_study(const ButcherTableau& t, const IVProblem& problem,
                                       const std::vector<double>& step_grid, const StudyOptions& opt) {
  if (opt.low_storage) return run_convergence_study(extract_reduced(t), problem, step_grid, opt);
  return study(t, [&](const IVProblem& p, double h, long n) { return integrate(t, p, h, n); }, problem, step_grid,
               opt);
}

ConvergenceStudy run_convergence_study(const ReducedParameters& params, const IVProblem& problem,
                                       const std::vector<double>& step_grid, StudyOptions opt) {
  opt.low_storage = true;
  return study(
      apply_constraints(params),
      [&](const IVProblem& p, double h, long n) { return integrate_low_storage(params, p, h, n); }, problem,
      step_grid, opt);
}

void write_study_csv(const ConvergenceStudy& st, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "h,error,pairwise_order\n";
  for (std::size_t k = 0; k < st.steps.size(); ++k) {
    out << sci(st.steps[k]) << ',' << sci(st.errors[k]) << ',';
    if (k > 0) out << sci(st.pairwise_orders[k - 1]);
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

} // namespace esrk
