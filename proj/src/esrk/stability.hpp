#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "esrk/tableau.hpp"

namespace esrk {

struct StabilityConfig {
  double stab_tol = 1e-8;
  double beta_tol = 1e-10;
  std::size_t samples = 2048;
  double x_cap = 0.0;          // <= 0 selects default_x_cap(s)
  double required_extent = 0.0;
};

/// Scan limit on the negative real axis: 0.4 s^2, never below 8.
double default_x_cap(std::size_t s);

struct StabilityReport {
  std::vector<double> beta;
  double beta_error = 0.0;
  double real_axis_extent = 0.0;
  std::optional<double> root_sum; // -beta_{s-1}/beta_s when beta_s != 0
  bool is_stable = false;
};

struct StabilityGrid {
  double re_min = 0, re_max = 0, im_min = 0, im_max = 0;
  std::size_t nx = 0, ny = 0;
  std::vector<double> values; // nx * ny, row-major over the real axis index

  double re(std::size_t i) const { return re_min + (re_max - re_min) * double(i) / double(nx - 1); }
  double im(std::size_t j) const { return im_min + (im_max - im_min) * double(j) / double(ny - 1); }
  double at(std::size_t i, std::size_t j) const { return values[i * ny + j]; }
};

/// beta_0 = 1, beta_k = b^T A^{k-1} 1 for k = 1..s (A is nilpotent, so the
/// resolvent series stops at degree s).
std::vector<double> stability_coefficients(const ButcherTableau& t);

/// max_{j<=4} |beta_j - 1/j!|. Throws StructuralError for fewer than 5 entries.
double check_beta_conditions(const std::vector<double>& beta);

double evaluate_polynomial(const std::vector<double>& beta, double x);
std::complex<double> evaluate_polynomial(const std::vector<double>& beta, std::complex<double> z);

/// Largest x with |R(-x')| <= 1 + stab_tol on all sampled x' in [0, x];
/// the crossing is refined by 20 bisection steps.
double real_axis_extent(const std::vector<double>& beta, double x_cap, std::size_t samples,
                        double stab_tol = 1e-8);

StabilityGrid stability_grid(const ButcherTableau& t, double re_min, double re_max, double im_min,
                             double im_max, std::size_t nx, std::size_t ny);

StabilityReport validate_scheme(const ButcherTableau& t, const StabilityConfig& cfg);

/// CSV with header `re,im,magnitude`, one grid point per line.
void write_grid_csv(const StabilityGrid& grid, const std::string& path);

} // namespace esrk
