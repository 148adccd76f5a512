#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace esrk {

/// Explicit s-stage Runge-Kutta tableau (A, b, c), row-major A.
///
/// The constructors always derive c from the row sums of A, so a tableau built
/// through them satisfies the row-sum rule by construction. `set_c` exists so
/// that inconsistent data read from elsewhere can still be inspected.
class ButcherTableau {
public:
  ButcherTableau() = default;

  /// Builds from a dense s x s matrix and weights; c is the row sum of A.
  ButcherTableau(std::vector<std::vector<double>> A, std::vector<double> b);

  std::size_t stages() const noexcept { return b_.size(); }
  double a(std::size_t i, std::size_t j) const { return A_[i][j]; }
  const std::vector<std::vector<double>>& A() const noexcept { return A_; }
  const std::vector<double>& b() const noexcept { return b_; }
  const std::vector<double>& c() const noexcept { return c_; }

  void set_a(std::size_t i, std::size_t j, double v) { A_[i][j] = v; }
  void set_b(std::size_t i, double v) { b_[i] = v; }
  void set_c(std::size_t i, double v) { c_[i] = v; }
  void recompute_c();

  static ButcherTableau forward_euler();
  static ButcherTableau classical_rk4();

private:
  std::vector<std::vector<double>> A_;
  std::vector<double> b_;
  std::vector<double> c_;
};

/// The 2s-1 free coefficients of the Van der Houwen (2R) low-storage form:
/// sub[k] is A[k+1][k], b are the weights. Every other entry below the
/// subdiagonal in column j equals b[j].
struct ReducedParameters {
  std::size_t s = 0;
  std::vector<double> a_sub;
  std::vector<double> b;

  std::size_t size() const noexcept { return a_sub.size() + b.size(); }

  /// Flat view in reduced-set order: a_sub[0..s-2] followed by b[0..s-1].
  std::vector<double> flat() const;
  static ReducedParameters from_flat(std::size_t s, const std::vector<double>& values);

  /// Throws StructuralError unless the lengths are s-1 and s and all finite.
  void check() const;

  bool operator==(const ReducedParameters&) const = default;
};

enum class CoefficientKind { SubdiagonalA, WeightB };

/// Reference to one reduced coefficient. For SubdiagonalA, `index` k names
/// A[k+1][k] (row k+1); for WeightB it names b[index].
struct CoefficientRef {
  CoefficientKind kind = CoefficientKind::WeightB;
  std::size_t index = 0;

  std::size_t row() const noexcept { return kind == CoefficientKind::SubdiagonalA ? index + 1 : 0; }

  /// Position in the flat reduced-set ordering for s stages.
  std::size_t flat(std::size_t s) const noexcept {
    return kind == CoefficientKind::SubdiagonalA ? index : (s - 1) + index;
  }
  static CoefficientRef from_flat(std::size_t s, std::size_t pos);
  bool valid_for(std::size_t s) const noexcept;

  auto operator<=>(const CoefficientRef&) const = default;
};

/// Builds the full tableau from reduced parameters.
ButcherTableau apply_constraints(const ReducedParameters& params);

/// Reads the subdiagonal and weights back out of a full tableau.
ReducedParameters extract_reduced(const ButcherTableau& t);

/// (2s - 1) minus the number of heuristic substitutions in force.
int free_parameter_count(std::size_t s, std::size_t active_heuristics);

/// Structural violations, one human-readable line each. Empty means valid.
std::vector<std::string> validate_tableau(const ButcherTableau& t, double row_sum_tol = 1e-14);

} // namespace esrk
