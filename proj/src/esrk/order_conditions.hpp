#pragma once

#include <array>
#include <vector>

#include "esrk/heuristics.hpp"
#include "esrk/tableau.hpp"

namespace esrk {

inline constexpr std::size_t kOrderConditions = 8;
inline constexpr double kDefaultOrderTol = 1e-10;

/// Right-hand sides of the eight fourth-order conditions, in residual order.
inline constexpr std::array<double, kOrderConditions> kOrderTargets = {
    1.0, 1.0 / 2.0, 1.0 / 3.0, 1.0 / 6.0, 1.0 / 4.0, 1.0 / 8.0, 1.0 / 12.0, 1.0 / 24.0};

inline constexpr std::array<const char*, kOrderConditions> kOrderConditionNames = {
    "sum b = 1",          "sum b c = 1/2",      "sum b c^2 = 1/3",   "sum b A c = 1/6",
    "sum b c^3 = 1/4",    "sum b (A c) c = 1/8", "sum b A c^2 = 1/12", "sum b A A c = 1/24"};

/// Residuals [sum b - 1, sum bc - 1/2, sum bc^2 - 1/3, sum bAc - 1/6,
/// sum bc^3 - 1/4, sum b(Ac)c - 1/8, sum bAc^2 - 1/12, sum bAAc - 1/24].
struct OrderResiduals {
  std::array<double, kOrderConditions> r{};

  double max_abs() const;
  bool feasible(double tol = kDefaultOrderTol) const { return max_abs() <= tol; }
};

/// Direct nested summation over the strictly lower triangle, fixed
/// left-to-right order.
OrderResiduals order_residuals(const ButcherTableau& t);

/// Residuals and their Jacobian with respect to the free parameters that
/// remain after heuristic substitution. Row-major 8 x n.
struct ResidualJacobian {
  OrderResiduals residuals;
  std::vector<std::size_t> free; // flat reduced-set position of each column
  std::vector<double> jacobian;  // kOrderConditions rows, free.size() columns

  double at(std::size_t row, std::size_t col) const { return jacobian[row * free.size() + col]; }
};

ResidualJacobian order_residual_jacobian(const ReducedParameters& params,
                                         const std::vector<HeuristicExpression>& active_heuristics);

} // namespace esrk
