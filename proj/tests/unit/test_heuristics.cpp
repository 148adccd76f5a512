#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "esrk/error.hpp"
#include "esrk/heuristics.hpp"

using namespace esrk;

namespace {

constexpr std::size_t S = 16;

CoefficientRef a(std::size_t row) { return {CoefficientKind::SubdiagonalA, row - 1}; }
CoefficientRef b(std::size_t j) { return {CoefficientKind::WeightB, j}; }

void check_closed(const HeuristicExpression& e, std::size_t max_terms) {
  REQUIRE(e.target.valid_for(S));
  REQUIRE(!e.terms.empty());
  REQUIRE(e.terms.size() <= max_terms);
  REQUIRE(e.combiners.size() + 1 == e.terms.size());
  for (const auto& t : e.terms) {
    REQUIRE(t.ref.valid_for(S));
    REQUIRE(t.ref != e.target);
    REQUIRE(t.power >= 1);
    REQUIRE(t.power <= kMaxPower);
  }
}

// Finds a seed whose stream makes `kind` turn `from` into `want`.
bool reachable(const std::string& from, const std::string& want, MutationKind kind) {
  for (std::uint64_t seed = 0; seed < 20000; ++seed) {
    auto e = parse_expression(from, S);
    RandomStream rng(seed);
    if (mutate_with(e, S, rng, kind, kDefaultMaxTermsAfterMutation) && format_expression(e) == want) return true;
  }
  return false;
}

} // namespace

TEST_CASE("parse the single-term power heuristic") {
  const auto e = parse_expression("b(5) = a(2,1)^2", S);
  CHECK(e.target == b(5));
  REQUIRE(e.terms.size() == 1);
  CHECK(e.terms[0].ref == a(2));
  CHECK(e.terms[0].ref.row() == 2);
  CHECK(e.terms[0].power == 2);
  CHECK(format_expression(e) == "b(5)=a(2,1)^2");
}

TEST_CASE("parse a three-term sum") {
  const auto e = parse_expression("b(3) = b(4) + a(1,0) + a(15,14)", S);
  CHECK(e.target == b(3));
  REQUIRE(e.terms.size() == 3);
  CHECK(e.terms[0].ref == b(4));
  CHECK(e.terms[1].ref == a(1));
  CHECK(e.terms[2].ref == a(15));
  CHECK(e.combiners == std::vector<Combiner>{Combiner::Add, Combiner::Add});
}

TEST_CASE("every published heuristic parses and round-trips") {
  for (const char* text : {"a(5,4) = b(8) + b(13)", "b(10) = a(9,8) * b(9)", "b(3) = b(4) + a(1,0) + a(15,14)",
                           "b(5) = a(2,1)^2", "b(1) = a(7,6) + b(12)"}) {
    const auto e = parse_expression(text, S);
    CHECK(parse_expression(format_expression(e), S) == e);
  }
}

TEST_CASE("parse errors carry positions") {
  try {
    parse_expression("a(3,1) = b(0)", S);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.detail().find("subdiagonal") != std::string::npos);
    CHECK(e.position() == 0);
  }
  try {
    parse_expression("b(5) = a(2,1) - b(3)", S);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 14);
  }
  CHECK_THROWS_AS(parse_expression("b(16) = b(0)", S), ParseError);
  CHECK_THROWS_AS(parse_expression("a(16,15) = b(0)", S), ParseError);
  CHECK_THROWS_AS(parse_expression("b(2) = b(2)", S), ParseError);
  CHECK_THROWS_AS(parse_expression("b(2) = b(1)^7", S), ParseError);
  CHECK_THROWS_AS(parse_expression("b(2) =", S), ParseError);
  CHECK_THROWS_AS(parse_expression("", S), ParseError);
}

TEST_CASE("power one prints without exponent and whitespace is irrelevant") {
  CHECK(format_expression(parse_expression(" b( 2 )=  a(1 ,0)^1 * b(3)", S)) == "b(2)=a(1,0)*b(3)");
}

TEST_CASE("evaluation follows precedence") {
  // b(0) = b(1) + b(2) * b(3)  ->  1 + 2*3
  const auto e = parse_expression("b(0)=b(1)+b(2)*b(3)", 4);
  const std::vector<double> flat = {0, 0, 0, 9, 1, 2, 3};
  CHECK(e.evaluate(flat, 4) == 7.0);
}

TEST_CASE("apply_heuristics examples") {
  ReducedParameters p;
  p.s = S;
  p.a_sub.assign(S - 1, 0.05);
  p.b.assign(S, 0.01);
  p.a_sub[1] = 0.3;
  p.b[8] = 0.1;
  p.b[13] = 0.2;

  const auto h1 = parse_expression("b(5)=a(2,1)^2", S);
  const auto h2 = parse_expression("a(5,4)=b(8)+b(13)", S);
  CHECK(apply_heuristics(p, {h1}).b[5] == doctest::Approx(0.09).epsilon(1e-15));
  CHECK(apply_heuristics(p, {h2}).a_sub[4] == doctest::Approx(0.3).epsilon(1e-15));

  const auto both = apply_heuristics(p, {h1, h2});
  CHECK(both.b[5] == doctest::Approx(0.09).epsilon(1e-15));
  CHECK(both.a_sub[4] == doctest::Approx(0.3).epsilon(1e-15));
  auto expected = p;
  expected.b[5] = both.b[5];
  expected.a_sub[4] = both.a_sub[4];
  CHECK(both == expected);
  CHECK(free_positions(S, {h1, h2}).size() == 29);
  CHECK(free_parameter_count(S, 2) == 29);

  CHECK_THROWS_AS(apply_heuristics(p, {h1, parse_expression("b(5)=b(1)", S)}), ConstraintError);
  CHECK_THROWS_AS(apply_heuristics(p, {h1, parse_expression("b(8)=b(5)", S)}), ConstraintError);
}

TEST_CASE("generation is deterministic per seed") {
  RandomStream r1(77), r2(77);
  for (int k = 0; k < 100; ++k) CHECK(gen_random_expression(S, r1) == gen_random_expression(S, r2));
}

TEST_CASE("the squared-subdiagonal heuristic is reachable by generation") {
  bool found = false;
  for (std::uint64_t seed = 0; seed < 200000 && !found; ++seed) {
    RandomStream rng(seed);
    found = format_expression(gen_random_expression(S, rng, 1)) == "b(5)=a(2,1)^2";
  }
  CHECK(found);
}

TEST_CASE("property: 10,000 generated expressions are closed and round-trip") {
  RandomStream rng(2024);
  std::set<std::size_t> lengths;
  for (int k = 0; k < 10000; ++k) {
    const auto e = gen_random_expression(S, rng);
    check_closed(e, kDefaultMaxTerms);
    lengths.insert(e.terms.size());
    if (e.terms.size() > 1)
      for (const auto& t : e.terms) REQUIRE(t.power == 1);
    const auto text = format_expression(e);
    const auto back = parse_expression(text, S);
    REQUIRE(back == e);
    REQUIRE(format_expression(back) == text);
  }
  CHECK(lengths == std::set<std::size_t>{1, 2, 3});
}

TEST_CASE("property: mutation chains stay closed") {
  RandomStream rng(555);
  std::set<MutationKind> seen;
  for (int chain = 0; chain < 1000; ++chain) {
    auto e = gen_random_expression(S, rng);
    for (int step = 0; step < 10; ++step) {
      MutationKind kind{};
      const auto next = mutate(e, S, rng, kDefaultMaxTermsAfterMutation, &kind);
      seen.insert(kind);
      check_closed(next, kDefaultMaxTermsAfterMutation);
      REQUIRE(next.target == e.target);
      if (kind == MutationKind::Addition) REQUIRE(next.terms.size() == e.terms.size() + 1);
      if (kind == MutationKind::Deletion) REQUIRE(next.terms.size() + 1 == e.terms.size());
      if (kind == MutationKind::Replace) REQUIRE(next.terms.size() == e.terms.size());
      REQUIRE(parse_expression(format_expression(next), S) == next);
      e = next;
    }
  }
  CHECK(seen.size() == 4);
}

TEST_CASE("worked mutation example") {
  CHECK(reachable("b(0)=a(1,0)+b(2)+b(3)", "b(0)=a(1,0)+b(2)+b(3)+a(2,1)", MutationKind::Addition));
  CHECK(reachable("b(0)=a(1,0)+b(2)+b(3)+a(2,1)", "b(0)=a(1,0)+b(2)+b(3)+b(4)", MutationKind::Replace));
}

TEST_CASE("mutations that cannot apply are refused and resampled") {
  auto single = parse_expression("b(1)=a(3,2)^3", S);
  RandomStream rng(1);
  CHECK_FALSE(mutate_with(single, S, rng, MutationKind::Deletion, 4));
  CHECK_FALSE(mutate_with(single, S, rng, MutationKind::Combined, 4));
  auto full = parse_expression("b(1)=b(2)+b(3)+b(4)+b(5)", S);
  CHECK_FALSE(mutate_with(full, S, rng, MutationKind::Addition, 4));

  for (int k = 0; k < 200; ++k) {
    MutationKind kind{};
    const auto out = mutate(single, S, rng, 4, &kind);
    CHECK(kind != MutationKind::Deletion);
    CHECK(out.terms.size() >= 1);
  }
}

TEST_CASE("power merge caps the exponent") {
  bool merged = false;
  for (std::uint64_t seed = 0; seed < 1000 && !merged; ++seed) {
    auto e = parse_expression("b(1)=b(2)^5*b(3)^4", S);
    RandomStream rng(seed);
    REQUIRE(mutate_with(e, S, rng, MutationKind::Combined, 4));
    if (e.terms.size() == 1) {
      CHECK(e.terms[0].power == kMaxPower);
      merged = true;
    }
  }
  CHECK(merged);
}

TEST_CASE("expression lists") {
  const auto list = parse_expression_list("b(5)=a(2,1)^2; a(5,4)=b(8)+b(13)", S);
  REQUIRE(list.size() == 2);
  CHECK(join_expressions(list) == "b(5)=a(2,1)^2; a(5,4)=b(8)+b(13)");
  CHECK(parse_expression_list("  ", S).empty());
  try {
    parse_expression_list("b(5)=a(2,1)^2; b(1)=a(3,1)", S);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 20);
  }
}
