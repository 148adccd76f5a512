#include "esrk/heuristics.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "esrk/error.hpp"

namespace esrk {
namespace {

std::size_t reduced_size(std::size_t s) { return 2 * s - 1; }

// Uniform over the reduced set with `exclude` removed.
CoefficientRef draw_ref(std::size_t s, RandomStream& rng, std::size_t exclude) {
  auto pos = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(reduced_size(s)) - 2));
  if (pos >= exclude) ++pos;
  return CoefficientRef::from_flat(s, pos);
}

Combiner draw_combiner(RandomStream& rng) {
  return rng.uniform_int(0, 1) == 0 ? Combiner::Add : Combiner::Multiply;
}

void erase_term(HeuristicExpression& e, std::size_t idx) {
  e.terms.erase(e.terms.begin() + static_cast<std::ptrdiff_t>(idx));
  if (!e.combiners.empty())
    e.combiners.erase(e.combiners.begin() + static_cast<std::ptrdiff_t>(idx == 0 ? 0 : idx - 1));
}

} // namespace

void HeuristicExpression::check(std::size_t s) const {
  if (!target.valid_for(s)) throw ConstraintError("heuristic target " + format_coefficient(target) + " is outside the reduced set");
  if (terms.empty()) throw ConstraintError("heuristic has no terms");
  if (combiners.size() + 1 != terms.size()) throw ConstraintError("heuristic combiner count does not match its terms");
  for (const Term& t : terms) {
    if (!t.ref.valid_for(s)) throw ConstraintError("heuristic term " + format_coefficient(t.ref) + " is outside the reduced set");
    if (t.ref == target) throw ConstraintError("heuristic " + format_coefficient(target) + " references itself");
    if (t.power < 1 || t.power > kMaxPower) throw ConstraintError("heuristic power must lie in [1,6]");
  }
}

HeuristicExpression gen_random_expression(std::size_t s, RandomStream& rng, std::size_t max_terms) {
  if (s < 2) throw ConstraintError("heuristics need at least two stages");
  if (max_terms < 1) throw ConstraintError("max_terms must be at least 1");
  HeuristicExpression e;
  const auto target = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(reduced_size(s)) - 1));
  e.target = CoefficientRef::from_flat(s, target);
  const auto len = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(max_terms)));
  for (std::size_t k = 0; k < len; ++k) e.terms.push_back({draw_ref(s, rng, target), 1});
  for (std::size_t k = 0; k + 1 < len; ++k) e.combiners.push_back(draw_combiner(rng));
  if (len == 1) e.terms[0].power = static_cast<int>(rng.uniform_int(1, kMaxPower));
  return e;
}

bool mutate_with(HeuristicExpression& e, std::size_t s, RandomStream& rng, MutationKind kind,
                 std::size_t max_terms_after_mutation) {
  const std::size_t target = e.target.flat(s);
  const std::size_t len = e.terms.size();
  switch (kind) {
  case MutationKind::Replace: {
    const auto idx = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(len) - 1));
    e.terms[idx].ref = draw_ref(s, rng, target);
    return true;
  }
  case MutationKind::Addition: {
    if (len >= max_terms_after_mutation) return false;
    const Combiner op = draw_combiner(rng);
    e.terms.push_back({draw_ref(s, rng, target), 1});
    e.combiners.push_back(op);
    return true;
  }
  case MutationKind::Deletion: {
    if (len <= 1) return false;
    erase_term(e, static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(len) - 1)));
    return true;
  }
  case MutationKind::Combined: {
    if (len < 2) return false;
    const auto i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(len) - 1));
    auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(len) - 2));
    if (j >= i) ++j;
    const auto op = rng.uniform_int(0, 2);
    const Term moved = e.terms[j];
    if (op == 2) {
      // Power merge: x^p * x^q -> x^(p+q), capped.
      e.terms[i].power = std::min(kMaxPower, e.terms[i].power + moved.power);
      erase_term(e, j);
      return true;
    }
    erase_term(e, j);
    const std::size_t anchor = j < i ? i - 1 : i;
    e.terms.insert(e.terms.begin() + static_cast<std::ptrdiff_t>(anchor + 1), moved);
    e.combiners.insert(e.combiners.begin() + static_cast<std::ptrdiff_t>(anchor),
                       op == 0 ? Combiner::Add : Combiner::Multiply);
    return true;
  }
  }
  return false;
}

HeuristicExpression mutate(const HeuristicExpression& expr, std::size_t s, RandomStream& rng,
                           std::size_t max_terms_after_mutation, MutationKind* kind_out) {
  for (;;) {
    const auto kind = static_cast<MutationKind>(rng.uniform_int(0, 3));
    HeuristicExpression out = expr;
    if (mutate_with(out, s, rng, kind, max_terms_after_mutation)) {
      if (kind_out) *kind_out = kind;
      return out;
    }
  }
}

void check_independent(const std::vector<HeuristicExpression>& exprs, std::size_t s) {
  std::set<std::size_t> targets;
  for (const auto& e : exprs) {
    e.check(s);
    if (!targets.insert(e.target.flat(s)).second)
      throw ConstraintError("duplicate heuristic target " + format_coefficient(e.target));
  }
  for (const auto& e : exprs)
    for (const Term& t : e.terms)
      if (targets.count(t.ref.flat(s)))
        throw ConstraintError("chained heuristics: " + format_coefficient(t.ref) +
                              " is both a target and a term of " + format_expression(e));
}

std::vector<std::size_t> free_positions(std::size_t s, const std::vector<HeuristicExpression>& exprs) {
  std::vector<bool> bound(reduced_size(s), false);
  for (const auto& e : exprs) bound[e.target.flat(s)] = true;
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < bound.size(); ++k)
    if (!bound[k]) out.push_back(k);
  return out;
}

ReducedParameters apply_heuristics(const ReducedParameters& params,
                                   const std::vector<HeuristicExpression>& exprs) {
  params.check();
  check_independent(exprs, params.s);
  const std::vector<double> in = params.flat();
  std::vector<double> out = in;
  for (const auto& e : exprs) out[e.target.flat(params.s)] = e.evaluate(in, params.s);
  return ReducedParameters::from_flat(params.s, out);
}

std::string format_coefficient(const CoefficientRef& ref) {
  if (ref.kind == CoefficientKind::SubdiagonalA)
    return "a(" + std::to_string(ref.index + 1) + "," + std::to_string(ref.index) + ")";
  return "b(" + std::to_string(ref.index) + ")";
}

std::string format_expression(const HeuristicExpression& expr) {
  std::string out = format_coefficient(expr.target) + "=";
  for (std::size_t k = 0; k < expr.terms.size(); ++k) {
    if (k > 0) out += expr.combiners[k - 1] == Combiner::Add ? "+" : "*";
    out += format_coefficient(expr.terms[k].ref);
    if (expr.terms[k].power != 1) out += "^" + std::to_string(expr.terms[k].power);
  }
  return out;
}

std::string join_expressions(const std::vector<HeuristicExpression>& exprs) {
  std::string out;
  for (std::size_t k = 0; k < exprs.size(); ++k) {
    if (k) out += "; ";
    out += format_expression(exprs[k]);
  }
  return out;
}

namespace {

class Scanner {
public:
  Scanner(std::string_view text, std::size_t s) : text_(text), s_(s) {}

  HeuristicExpression expression() {
    HeuristicExpression e;
    const std::size_t target_pos = skip();
    e.target = coefficient();
    expect('=');
    e.terms.push_back(term());
    for (;;) {
      skip();
      if (pos_ >= text_.size()) break;
      const char op = text_[pos_];
      if (op != '+' && op != '*') fail("expected '+', '*' or end of input");
      ++pos_;
      e.combiners.push_back(op == '+' ? Combiner::Add : Combiner::Multiply);
      e.terms.push_back(term());
    }
    for (const Term& t : e.terms)
      if (t.ref == e.target)
        throw ParseError("heuristic " + format_coefficient(e.target) + " references itself", target_pos);
    return e;
  }

private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

  std::size_t skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return pos_;
  }

  void expect(char ch) {
    skip();
    if (pos_ >= text_.size() || text_[pos_] != ch) fail(std::string("expected '") + ch + "'");
    ++pos_;
  }

  long integer() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected integer");
    if (pos_ - start > 6) throw ParseError("integer too large", start);
    return std::stol(std::string(text_.substr(start, pos_ - start)));
  }

  CoefficientRef coefficient() {
    const std::size_t start = skip();
    if (pos_ >= text_.size()) fail("expected coefficient a(i,j) or b(j)");
    const char kind = text_[pos_];
    if (kind != 'a' && kind != 'b') fail("expected coefficient a(i,j) or b(j)");
    ++pos_;
    expect('(');
    CoefficientRef ref;
    if (kind == 'a') {
      const long row = integer();
      expect(',');
      const long col = integer();
      expect(')');
      if (row != col + 1)
        throw ParseError("a(" + std::to_string(row) + "," + std::to_string(col) +
                             ") is off the subdiagonal; only a(k+1,k) is free in the reduced scheme",
                         start);
      ref = {CoefficientKind::SubdiagonalA, static_cast<std::size_t>(col)};
    } else {
      const long idx = integer();
      expect(')');
      ref = {CoefficientKind::WeightB, static_cast<std::size_t>(idx)};
    }
    if (!ref.valid_for(s_))
      throw ParseError(format_coefficient(ref) + " is out of range for " + std::to_string(s_) + " stages", start);
    return ref;
  }

  Term term() {
    Term t{coefficient(), 1};
    skip();
    if (pos_ < text_.size() && text_[pos_] == '^') {
      ++pos_;
      const std::size_t at = skip();
      const long p = integer();
      if (p < 1 || p > kMaxPower) throw ParseError("power must lie in [1,6]", at);
      t.power = static_cast<int>(p);
    }
    return t;
  }

  std::string_view text_;
  std::size_t s_;
  std::size_t pos_ = 0;
};

} // namespace

HeuristicExpression parse_expression(std::string_view text, std::size_t s) {
  if (s < 2) throw UsageError("heuristics need at least two stages");
  return Scanner(text, s).expression();
}

std::vector<HeuristicExpression> parse_expression_list(std::string_view text, std::size_t s) {
  std::vector<HeuristicExpression> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(';', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view piece = text.substr(start, end - start);
    if (piece.find_first_not_of(" \t\r\n") != std::string_view::npos) {
      try {
        out.push_back(parse_expression(piece, s));
      } catch (const ParseError& e) {
        throw ParseError(e.detail(), start + e.position());
      }
    }
    start = end + 1;
  }
  return out;
}

} // namespace esrk
