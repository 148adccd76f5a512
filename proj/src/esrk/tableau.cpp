#include "esrk/tableau.hpp"

#include <cmath>
#include <cstdio>

#include "esrk/error.hpp"

namespace esrk {

ButcherTableau::ButcherTableau(std::vector<std::vector<double>> A, std::vector<double> b)
    : A_(std::move(A)), b_(std::move(b)) {
  if (A_.size() != b_.size())
    throw StructuralError("tableau: A has " + std::to_string(A_.size()) + " rows but b has " +
                          std::to_string(b_.size()) + " entries");
  for (std::size_t i = 0; i < A_.size(); ++i)
    if (A_[i].size() != b_.size())
      throw StructuralError("tableau: row " + std::to_string(i) + " of A has " +
                            std::to_string(A_[i].size()) + " entries, expected " +
                            std::to_string(b_.size()));
  recompute_c();
}

void ButcherTableau::recompute_c() {
  c_.assign(b_.size(), 0.0);
  for (std::size_t i = 0; i < A_.size(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < i; ++j) sum += A_[i][j];
    c_[i] = sum;
  }
}

ButcherTableau ButcherTableau::forward_euler() { return ButcherTableau({{0.0}}, {1.0}); }

ButcherTableau ButcherTableau::classical_rk4() {
  return ButcherTableau({{0.0, 0.0, 0.0, 0.0},
                         {0.5, 0.0, 0.0, 0.0},
                         {0.0, 0.5, 0.0, 0.0},
                         {0.0, 0.0, 1.0, 0.0}},
                        {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0});
}

std::vector<double> ReducedParameters::flat() const {
  std::vector<double> out(a_sub);
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

ReducedParameters ReducedParameters::from_flat(std::size_t s, const std::vector<double>& values) {
  if (s == 0 || values.size() != 2 * s - 1)
    throw StructuralError("reduced parameters: expected " + std::to_string(2 * s - 1) +
                          " values, got " + std::to_string(values.size()));
  ReducedParameters p;
  p.s = s;
  p.a_sub.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(s - 1));
  p.b.assign(values.begin() + static_cast<std::ptrdiff_t>(s - 1), values.end());
  return p;
}

void ReducedParameters::check() const {
  if (s == 0) throw StructuralError("reduced parameters: stage count must be positive");
  if (a_sub.size() != s - 1)
    throw StructuralError("reduced parameters: a_sub has " + std::to_string(a_sub.size()) +
                          " entries, expected s-1 = " + std::to_string(s - 1));
  if (b.size() != s)
    throw StructuralError("reduced parameters: b has " + std::to_string(b.size()) +
                          " entries, expected s = " + std::to_string(s));
  for (double v : a_sub)
    if (!std::isfinite(v)) throw StructuralError("reduced parameters: non-finite a_sub entry");
  for (double v : b)
    if (!std::isfinite(v)) throw StructuralError("reduced parameters: non-finite b entry");
}

CoefficientRef CoefficientRef::from_flat(std::size_t s, std::size_t pos) {
  if (pos + 1 < s) return {CoefficientKind::SubdiagonalA, pos};
  return {CoefficientKind::WeightB, pos - (s - 1)};
}

bool CoefficientRef::valid_for(std::size_t s) const noexcept {
  if (kind == CoefficientKind::SubdiagonalA) return s >= 2 && index <= s - 2;
  return index < s;
}

ButcherTableau apply_constraints(const ReducedParameters& params) {
  params.check();
  const std::size_t s = params.s;
  std::vector<std::vector<double>> A(s, std::vector<double>(s, 0.0));
  for (std::size_t i = 1; i < s; ++i) {
    for (std::size_t j = 0; j + 1 < i; ++j) A[i][j] = params.b[j];
    A[i][i - 1] = params.a_sub[i - 1];
  }
  return ButcherTableau(std::move(A), params.b);
}

ReducedParameters extract_reduced(const ButcherTableau& t) {
  ReducedParameters p;
  p.s = t.stages();
  for (std::size_t i = 1; i < p.s; ++i) p.a_sub.push_back(t.a(i, i - 1));
  p.b = t.b();
  return p;
}

int free_parameter_count(std::size_t s, std::size_t active_heuristics) {
  return static_cast<int>(2 * s - 1) - static_cast<int>(active_heuristics);
}

std::vector<std::string> validate_tableau(const ButcherTableau& t, double row_sum_tol) {
  std::vector<std::string> out;
  const std::size_t s = t.stages();
  if (s == 0) {
    out.emplace_back("empty tableau");
    return out;
  }
  if (t.A().size() != s) out.push_back("A has " + std::to_string(t.A().size()) + " rows, expected " + std::to_string(s));
  if (t.c().size() != s) out.push_back("c has " + std::to_string(t.c().size()) + " entries, expected " + std::to_string(s));
  if (!out.empty()) return out;

  for (std::size_t i = 0; i < s; ++i) {
    if (t.A()[i].size() != s) {
      out.push_back("row " + std::to_string(i) + " of A has wrong length");
      continue;
    }
    for (std::size_t j = i; j < s; ++j)
      if (t.a(i, j) != 0.0)
        out.push_back("upper-triangle nonzero at (" + std::to_string(i) + "," + std::to_string(j) + ")");
  }
  for (std::size_t i = 0; i < s; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < i && j < t.A()[i].size(); ++j) sum += t.a(i, j);
    if (std::abs(t.c()[i] - sum) > row_sum_tol * std::max(1.0, std::abs(sum))) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "row-sum mismatch in row %zu: c=%.17g, sum of A row=%.17g", i,
                    t.c()[i], sum);
      out.emplace_back(buf);
    }
  }
  return out;
}

} // namespace esrk
