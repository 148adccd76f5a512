#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "esrk/tableau.hpp"

namespace esrk {

/// dydt = f(t, y). Implementations write every entry of dydt and must not
/// allocate state-sized storage.
using RhsFunction = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct IVProblem {
  std::string id;
  std::size_t dimension = 0;
  RhsFunction rhs;
  std::vector<double> y0;
  double t0 = 0.0;
  double t1 = 1.0;
  /// Exact solution at time t, when one is known; otherwise the study
  /// integrates a numeric reference.
  std::function<std::vector<double>(double)> exact;
  /// Most negative real eigenvalue of the linearization, if the problem is stiff
  /// enough for step stability to matter.
  std::optional<double> stiff_eigenvalue;
  /// Step sizes for a temporal study that stay inside the asymptotic range.
  std::vector<double> suggested_steps;
  std::map<std::string, double> parameters;
  std::string notes;
};

/// One classical explicit step with stage storage for every k_i.
std::vector<double> rk_step(const ButcherTableau& t, const IVProblem& problem, double tn,
                            std::span<const double> yn, double h);

/// Generic explicit stepper reusing its stage buffers between steps.
class GenericStepper {
public:
  GenericStepper(ButcherTableau tableau, std::size_t dimension);
  void step(const RhsFunction& f, double tn, double h, std::span<double> y);

private:
  ButcherTableau t_;
  std::vector<std::vector<double>> k_;
  std::vector<double> stage_;
};

/// Van der Houwen (2R) stepper for reduced tableaus. Holds exactly two
/// state-sized buffers (stage argument and stage derivative); the solution
/// vector passed to step() is updated in place and doubles as the running
/// accumulator y_n + h sum b_j k_j.
class LowStorageStepper {
public:
  LowStorageStepper(const ReducedParameters& params, std::size_t dimension);
  void step(const RhsFunction& f, double tn, double h, std::span<double> y);

  static constexpr std::size_t kOwnedBuffers = 2;

private:
  ReducedParameters p_;
  std::vector<double> c_;
  std::vector<double> stage_;
  std::vector<double> deriv_;
};

std::vector<double> low_storage_step(const ReducedParameters& params, const IVProblem& problem, double tn,
                                     std::span<const double> yn, double h);

/// Advances `steps` fixed steps of size h from the problem's initial state.
std::vector<double> integrate(const ButcherTableau& t, const IVProblem& problem, double h, long steps);
std::vector<double> integrate_low_storage(const ReducedParameters& params, const IVProblem& problem, double h,
                                          long steps);

struct Brusselator1DParams {
  double k1 = 1.0;
  double k2 = 2.0;
  double a0 = 1.5;
  double b0 = 3.0;
  double t1 = 50.0;
};
IVProblem brusselator_1d(const Brusselator1DParams& p = {});

struct Brusselator2DParams {
  double du = 0.1;
  double dv = 0.1;
  double a = 1.0;
  double b = 3.0;
  std::size_t grid_n = 32;
  double perturbation_amplitude = 1e-3;
  double initial_value = 0.1;
  double t1 = 10.0;
};
IVProblem brusselator_2d(const Brusselator2DParams& p = {});

/// Periodic 5-point Laplacian on an n x n grid with spacing dx (row-major field).
void laplacian_5pt(std::span<const double> field, std::size_t n, double dx, std::span<double> out);

struct StokesParams {
  double nu = 1.0;
  std::size_t grid_n = 16;
  double t1 = 1.0;
};
/// Unsteady periodic Stokes flow on [0, 2pi]^2 from Taylor-Green data,
/// Fourier-spectral in space. The state is (u_x, u_y), each n x n row-major.
IVProblem stokes_problem(const StokesParams& p = {});

/// Periodic Fourier-spectral derivative matrices on n points of [0, 2pi).
std::vector<double> spectral_d1(std::size_t n);
std::vector<double> spectral_d2(std::size_t n);
/// Discrete divergence d(u_x)/dx + d(u_y)/dy of a Stokes state.
std::vector<double> spectral_divergence(std::span<const double> state, std::size_t n);

/// sqrt(1/N sum (a_i - b_i)^2) over scalar entries.
double l2_error(std::span<const double> y_num, std::span<const double> y_ref);
/// sqrt(1/N sum ||a_i - b_i||^2) over a sequence of N states.
double l2_error(const std::vector<std::vector<double>>& y_num, const std::vector<std::vector<double>>& y_ref);

double convergence_order(double e1, double e2, double h1, double h2);

/// 20 geometrically spaced steps from 0.1 down to 0.001.
std::vector<double> default_step_grid();
std::vector<double> geometric_steps(double h_max, double h_min, std::size_t count);
std::vector<double> arithmetic_steps(double h_max, double h_min, std::size_t count);

struct StudyOptions {
  double reference_factor = 100.0;  // h_ref = h_min / factor for numeric references
  double stab_tol = 1e-8;
  /// Points whose error is below floor_factor * eps * max(1, rms|y_ref|) * (sqrt(steps) + sqrt(reference steps))
  /// are round-off dominated and left out of the fit.
  double floor_factor = 10.0;
  bool low_storage = false;
};

struct StudyPoint {
  double h = 0.0;
  long steps = 0;
  double error = 0.0;
  std::string excluded; // empty when the point is part of the fit
};

struct ConvergenceStudy {
  std::string problem_id;
  std::vector<double> steps;           // included, strictly decreasing
  std::vector<double> errors;
  std::vector<double> pairwise_orders; // steps.size() - 1 entries
  double fitted_slope = 0.0;
  std::vector<StudyPoint> points;      // every requested step, with exclusion reasons
  std::string reference;               // "exact" or "numeric h=..."
};

ConvergenceStudy run_convergence_study(const ButcherTableau& t, const IVProblem& problem,
                                       const std::vector<double>& step_grid, const StudyOptions& opt = {});

/// Same, advancing with the low-storage stepper.
ConvergenceStudy run_convergence_study(const ReducedParameters& params, const IVProblem& problem,
                                       const std::vector<double>& step_grid, StudyOptions opt = {});

/// Least-squares slope of log(error) against log(h).
double fitted_slope(const std::vector<double>& steps, const std::vector<double>& errors);

/// `h,error,pairwise_order` table; the first row leaves pairwise_order empty.
void write_study_csv(const ConvergenceStudy& study, const std::string& path);

/// Names accepted by make_problem.
const std::vector<std::string>& problem_names();
IVProblem make_problem(const std::string& name);

} // namespace esrk
