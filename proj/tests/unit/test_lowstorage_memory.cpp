// Counts heap allocations large enough to hold a state vector.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <new>

#include "esrk/benchmarks.hpp"
#include "esrk/solver.hpp"

namespace {
std::atomic<std::size_t> g_threshold{~std::size_t(0)};
std::atomic<long> g_big{0};
std::atomic<long> g_any{0};
} // namespace

void* operator new(std::size_t n) {
  ++g_any;
  if (n >= g_threshold) ++g_big;
  if (void* p = std::malloc(n ? n : 1)) return p;
  throw std::bad_alloc();
}
void operator delete(void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }

using namespace esrk;

TEST_CASE("low-storage stepper holds two state-sized buffers and allocates nothing per step") {
  SolveConfig cfg;
  cfg.seed = 1;
  const auto rep = solve(16, {}, cfg);
  REQUIRE(rep.status == SolveStatus::Converged);

  for (const auto& name : problem_names()) {
    const auto prob = make_problem(name);
    if (prob.dimension < 64) continue; // too small to tell state buffers from coefficients
    INFO(name);
    std::vector<double> y = prob.y0; // the caller's state, the third vector

    g_threshold = prob.dimension * sizeof(double);
    g_big = 0;
    LowStorageStepper ls(*rep.params, prob.dimension);
    const long owned = g_big;
    g_any = 0;
    for (int n = 0; n < 20; ++n) ls.step(prob.rhs, 0.001 * n, 0.001, y);
    const long during = g_any;
    g_threshold = ~std::size_t(0);

    CHECK(owned == long(LowStorageStepper::kOwnedBuffers));
    CHECK(owned + 1 <= 3);
    CHECK(during == 0);
  }
}

TEST_CASE("the generic stepper, for contrast, keeps one buffer per stage") {
  SolveConfig cfg;
  cfg.seed = 1;
  const auto rep = solve(16, {}, cfg);
  REQUIRE(rep.tableau.has_value());
  const auto prob = make_problem("stokes");
  g_threshold = prob.dimension * sizeof(double);
  g_big = 0;
  GenericStepper gs(*rep.tableau, prob.dimension);
  const long owned = g_big;
  g_threshold = ~std::size_t(0);
  CHECK(owned >= 16);
}
