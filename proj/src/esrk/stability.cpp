#include "esrk/stability.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "esrk/error.hpp"
#include "esrk/format.hpp"
#include "esrk/parallel.hpp"

namespace esrk {

double default_x_cap(std::size_t s) { return std::max(0.4 * double(s) * double(s), 8.0); }

std::vector<double> stability_coefficients(const ButcherTableau& t) {
  const std::size_t s = t.stages();
  std::vector<double> beta(s + 1, 0.0);
  beta[0] = 1.0;
  std::vector<double> v(s, 1.0), next(s);
  for (std::size_t k = 1; k <= s; ++k) {
    double dot = 0.0;
    for (std::size_t i = 0; i < s; ++i) dot += t.b()[i] * v[i];
    beta[k] = dot;
    for (std::size_t i = 0; i < s; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < i; ++j) acc += t.a(i, j) * v[j];
      next[i] = acc;
    }
    v.swap(next);
  }
  return beta;
}

double check_beta_conditions(const std::vector<double>& beta) {
  if (beta.size() < 5)
    throw StructuralError("beta check needs at least 5 coefficients, got " + std::to_string(beta.size()));
  double err = 0.0, factorial = 1.0;
  for (std::size_t j = 0; j <= 4; ++j) {
    if (j > 0) factorial *= double(j);
    err = std::max(err, std::abs(beta[j] - 1.0 / factorial));
  }
  return err;
}

double evaluate_polynomial(const std::vector<double>& beta, double x) {
  double acc = 0.0;
  for (auto it = beta.rbegin(); it != beta.rend(); ++it) acc = acc * x + *it;
  return acc;
}

std::complex<double> evaluate_polynomial(const std::vector<double>& beta, std::complex<double> z) {
  std::complex<double> acc = 0.0;
  for (auto it = beta.rbegin(); it != beta.rend(); ++it) acc = acc * z + *it;
  return acc;
}

double real_axis_extent(const std::vector<double>& beta, double x_cap, std::size_t samples, double stab_tol) {
  if (!(x_cap > 0.0) || samples < 2) throw UsageError("real_axis_extent needs x_cap > 0 and samples >= 2");
  const double limit = 1.0 + stab_tol;
  auto passes = [&](double x) { return std::abs(evaluate_polynomial(beta, -x)) <= limit; };
  const double dx = x_cap / double(samples - 1);
  for (std::size_t k = 0; k < samples; ++k) {
    const double x = double(k) * dx;
    if (passes(x)) continue;
    if (k == 0) return 0.0;
    double lo = double(k - 1) * dx, hi = x;
    for (int it = 0; it < 20; ++it) {
      const double mid = 0.5 * (lo + hi);
      (passes(mid) ? lo : hi) = mid;
    }
    return lo;
  }
  return x_cap;
}

StabilityGrid stability_grid(const ButcherTableau& t, double re_min, double re_max, double im_min, double im_max,
                             std::size_t nx, std::size_t ny) {
  if (nx < 2 || ny < 2 || !(re_max > re_min) || !(im_max > im_min))
    throw UsageError("stability grid needs nonempty ranges and at least 2 points per axis");
  StabilityGrid g{re_min, re_max, im_min, im_max, nx, ny, std::vector<double>(nx * ny)};
  const std::vector<double> beta = stability_coefficients(t);
  parallel_for(nx, [&](std::size_t i) {
    for (std::size_t j = 0; j < ny; ++j) g.values[i * ny + j] = std::abs(evaluate_polynomial(beta, {g.re(i), g.im(j)}));
  });
  return g;
}

StabilityReport validate_scheme(const ButcherTableau& t, const StabilityConfig& cfg) {
  StabilityReport rep;
  rep.beta = stability_coefficients(t);
  std::vector<double> padded = rep.beta;
  if (padded.size() < 5) padded.resize(5, 0.0);
  rep.beta_error = check_beta_conditions(padded);
  const double cap = cfg.x_cap > 0.0 ? cfg.x_cap : default_x_cap(t.stages());
  rep.real_axis_extent = real_axis_extent(rep.beta, cap, cfg.samples, cfg.stab_tol);
  const std::size_t s = t.stages();
  if (s >= 1 && rep.beta[s] != 0.0) rep.root_sum = -rep.beta[s - 1] / rep.beta[s];
  rep.is_stable = rep.beta_error <= cfg.beta_tol && rep.real_axis_extent >= cfg.required_extent;
  return rep;
}

void write_grid_csv(const StabilityGrid& grid, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "re,im,magnitude\n";
  for (std::size_t i = 0; i < grid.nx; ++i)
    for (std::size_t j = 0; j < grid.ny; ++j)
      out << sci(grid.re(i)) << ',' << sci(grid.im(j)) << ',' << sci(grid.at(i, j)) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

} // namespace esrk
