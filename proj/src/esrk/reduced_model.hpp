#pragma once

#include <array>
#include <vector>

#include "esrk/dual.hpp"
#include "esrk/error.hpp"
#include "esrk/heuristics.hpp"
#include "esrk/order_conditions.hpp"
#include "esrk/tableau.hpp"

namespace esrk {

/// Reduced (2R) scheme evaluated directly on its 2s-1 coefficients.
///
/// Every product with A uses the column structure (entries below the
/// subdiagonal equal b_j), so A x costs O(s) via a running prefix sum. The
/// scalar type is double for plain evaluation and Dual for derivatives.
template <class T>
class ReducedModel {
public:
  ReducedModel(std::size_t s, std::vector<T> flat) : s_(s), p_(std::move(flat)) {}

  std::size_t stages() const noexcept { return s_; }
  const std::vector<T>& flat() const noexcept { return p_; }
  const T& sub(std::size_t k) const { return p_[k]; }
  const T& weight(std::size_t j) const { return p_[s_ - 1 + j]; }

  std::vector<T> times_a(const std::vector<T>& x) const {
    std::vector<T> y(s_, T(0.0));
    T prefix(0.0); // sum_{j < i-1} b_j x_j
    for (std::size_t i = 1; i < s_; ++i) {
      if (i >= 2) prefix += weight(i - 2) * x[i - 2];
      y[i] = prefix + sub(i - 1) * x[i - 1];
    }
    return y;
  }

  T weighted_sum(const std::vector<T>& x) const {
    T acc(0.0);
    for (std::size_t i = 0; i < s_; ++i) acc += weight(i) * x[i];
    return acc;
  }

  std::array<T, kOrderConditions> order_residuals() const {
    const std::vector<T> ones(s_, T(1.0));
    const std::vector<T> c = times_a(ones);
    std::vector<T> c2(s_), c3(s_);
    for (std::size_t i = 0; i < s_; ++i) {
      c2[i] = c[i] * c[i];
      c3[i] = c2[i] * c[i];
    }
    const std::vector<T> ac = times_a(c);
    std::vector<T> acc(s_);
    for (std::size_t i = 0; i < s_; ++i) acc[i] = ac[i] * c[i];
    const std::vector<T> ac2 = times_a(c2);
    const std::vector<T> aac = times_a(ac);
    std::array<T, kOrderConditions> r{weighted_sum(ones), weighted_sum(c), weighted_sum(c2), weighted_sum(ac),
                                      weighted_sum(c3),   weighted_sum(acc), weighted_sum(ac2), weighted_sum(aac)};
    for (std::size_t k = 0; k < kOrderConditions; ++k) r[k] -= T(kOrderTargets[k]);
    return r;
  }

  /// beta_0..beta_count-1 of the stability polynomial, beta_k = b^T A^{k-1} 1.
  std::vector<T> beta(std::size_t count) const {
    std::vector<T> out;
    out.reserve(count);
    out.push_back(T(1.0));
    std::vector<T> v(s_, T(1.0));
    for (std::size_t k = 1; k < count; ++k) {
      out.push_back(weighted_sum(v));
      v = times_a(v);
    }
    return out;
  }

  /// R(z) for real z via the stage recursion g = 1 + z A g, R = 1 + z b^T g.
  T stability_at(double z) const {
    std::vector<T> g(s_);
    T prefix(0.0);
    for (std::size_t i = 0; i < s_; ++i) {
      if (i >= 2) prefix += weight(i - 2) * g[i - 2];
      T row = prefix;
      if (i >= 1) row += sub(i - 1) * g[i - 1];
      g[i] = T(1.0) + T(z) * row;
    }
    return T(1.0) + T(z) * weighted_sum(g);
  }

private:
  std::size_t s_;
  std::vector<T> p_;
};

/// Flat reduced values with heuristic targets overwritten (plain evaluation).
inline ReducedModel<double> make_model(std::size_t s, const std::vector<double>& free_values,
                                       const std::vector<std::size_t>& free,
                                       const std::vector<HeuristicExpression>& exprs) {
  std::vector<double> p(2 * s - 1, 0.0);
  for (std::size_t m = 0; m < free.size(); ++m) p[free[m]] = free_values[m];
  for (const auto& e : exprs) p[e.target.flat(s)] = e.evaluate(p, s);
  return ReducedModel<double>(s, std::move(p));
}

/// Same, seeded so that gradients are taken with respect to the free values.
inline ReducedModel<Dual> make_dual_model(std::size_t s, const std::vector<double>& free_values,
                                          const std::vector<std::size_t>& free,
                                          const std::vector<HeuristicExpression>& exprs) {
  if (free.size() > Dual::kMaxDirections)
    throw StructuralError("too many free parameters for derivative evaluation (max " +
                          std::to_string(Dual::kMaxDirections) + ")");
  std::vector<Dual> p(2 * s - 1);
  for (std::size_t m = 0; m < free.size(); ++m) p[free[m]] = Dual::variable(free_values[m], m, free.size());
  for (const auto& e : exprs) p[e.target.flat(s)] = e.evaluate(p, s);
  return ReducedModel<Dual>(s, std::move(p));
}

/// Dual model built from full reduced parameters and a heuristic set.
class DualReduced {
public:
  DualReduced(const ReducedParameters& params, const std::vector<HeuristicExpression>& exprs)
      : free_((check_independent(exprs, params.s), free_positions(params.s, exprs))),
        model_(build(params, exprs, free_)) {}

  const std::vector<std::size_t>& free() const noexcept { return free_; }
  std::array<Dual, kOrderConditions> order_residuals() const { return model_.order_residuals(); }

private:
  static ReducedModel<Dual> build(const ReducedParameters& params, const std::vector<HeuristicExpression>& exprs,
                                  const std::vector<std::size_t>& free) {
    const std::vector<double> flat = params.flat();
    std::vector<double> values;
    for (std::size_t pos : free) values.push_back(flat[pos]);
    return make_dual_model(params.s, values, free, exprs);
  }

  std::vector<std::size_t> free_;
  ReducedModel<Dual> model_;
};

} // namespace esrk
