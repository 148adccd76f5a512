#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "esrk/random.hpp"
#include "esrk/tableau.hpp"

namespace esrk {

enum class Combiner { Add, Multiply };

struct Term {
  CoefficientRef ref;
  int power = 1;
  bool operator==(const Term&) const = default;
};

/// Constraint `target = t0 (op t1 (op t2 ...))` over reduced coefficients.
///
/// Evaluation follows ordinary precedence: products bind tighter than sums,
/// so the chain is a sum of product groups.
struct HeuristicExpression {
  CoefficientRef target;
  std::vector<Term> terms;
  std::vector<Combiner> combiners; // terms.size() - 1 entries

  bool operator==(const HeuristicExpression&) const = default;

  template <class T>
  T evaluate(const std::vector<T>& flat_values, std::size_t s) const {
    T sum(0.0);
    T product = ipow_term(flat_values, s, 0);
    for (std::size_t k = 1; k < terms.size(); ++k) {
      if (combiners[k - 1] == Combiner::Multiply) {
        product = product * ipow_term(flat_values, s, k);
      } else {
        sum = sum + product;
        product = ipow_term(flat_values, s, k);
      }
    }
    return sum + product;
  }

  /// Throws ConstraintError on self reference, out-of-range refs, bad powers
  /// or a combiner count that does not match the terms.
  void check(std::size_t s) const;

private:
  template <class T>
  T ipow_term(const std::vector<T>& flat_values, std::size_t s, std::size_t k) const {
    const T& x = flat_values[terms[k].ref.flat(s)];
    T r = x;
    for (int p = 1; p < terms[k].power; ++p) r = r * x;
    return r;
  }
};

enum class MutationKind { Replace, Addition, Deletion, Combined };

inline constexpr int kMaxPower = 6;
inline constexpr std::size_t kDefaultMaxTerms = 3;
inline constexpr std::size_t kDefaultMaxTermsAfterMutation = 4;

/// Random constraint over the reduced set of an s-stage scheme.
HeuristicExpression gen_random_expression(std::size_t s, RandomStream& rng,
                                          std::size_t max_terms = kDefaultMaxTerms);

/// One mutation step. `kind_out`, when given, receives the kind actually applied.
HeuristicExpression mutate(const HeuristicExpression& expr, std::size_t s, RandomStream& rng,
                           std::size_t max_terms_after_mutation = kDefaultMaxTermsAfterMutation,
                           MutationKind* kind_out = nullptr);

/// Applies a specific mutation kind, or returns false when it cannot apply.
bool mutate_with(HeuristicExpression& expr, std::size_t s, RandomStream& rng, MutationKind kind,
                 std::size_t max_terms_after_mutation);

/// Throws ConstraintError for duplicate targets or a target used as a term of
/// another expression in the set.
void check_independent(const std::vector<HeuristicExpression>& exprs, std::size_t s);

/// Flat reduced-set positions that remain free once `exprs` are substituted.
std::vector<std::size_t> free_positions(std::size_t s, const std::vector<HeuristicExpression>& exprs);

/// Overwrites each target with its expression evaluated on `params`.
ReducedParameters apply_heuristics(const ReducedParameters& params,
                                   const std::vector<HeuristicExpression>& exprs);

HeuristicExpression parse_expression(std::string_view text, std::size_t s);
std::string format_expression(const HeuristicExpression& expr);
std::string format_coefficient(const CoefficientRef& ref);

/// Canonical texts joined with "; " (the store form of a heuristic set).
std::string join_expressions(const std::vector<HeuristicExpression>& exprs);

/// Inverse of join_expressions; an empty or blank string yields no expressions.
std::vector<HeuristicExpression> parse_expression_list(std::string_view text, std::size_t s);

} // namespace esrk
