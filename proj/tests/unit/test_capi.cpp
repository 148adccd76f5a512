// Links only the shared library and its public header.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "esrk/esrk.h"

namespace fs = std::filesystem;

TEST_CASE("version and error state") {
  CHECK(std::string(esrk_version()).size() > 0);
  esrk_config* cfg = nullptr;
  CHECK(esrk_config_parse("{\"bogus\": 1}", &cfg) == ESRK_PARSE_ERROR);
  CHECK(std::string(esrk_last_error()).find("bogus") != std::string::npos);
  CHECK(esrk_config_create(&cfg) == ESRK_OK);
  CHECK(std::string(esrk_last_error()).empty());
  CHECK(esrk_config_set(cfg, "solver.nope", "1") == ESRK_USAGE_ERROR);
  CHECK(esrk_config_set(cfg, "solver.required_extent", "6") == ESRK_OK);
  char* text = nullptr;
  REQUIRE(esrk_config_to_text(cfg, &text) == ESRK_OK);
  CHECK(std::string(text).find("\"required_extent\": 6") != std::string::npos);
  esrk_string_free(text);
  esrk_config_destroy(cfg);
  CHECK(esrk_config_create(nullptr) == ESRK_USAGE_ERROR);
}

TEST_CASE("RK4 through the C surface") {
  const double A[16] = {0, 0, 0, 0, 0.5, 0, 0, 0, 0, 0.5, 0, 0, 0, 0, 1, 0};
  const double b[4] = {1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6};
  esrk_tableau* t = nullptr;
  REQUIRE(esrk_tableau_from_full(4, A, b, &t) == ESRK_OK);
  CHECK(esrk_tableau_stages(t) == 4);
  double r[8];
  REQUIRE(esrk_tableau_order_residuals(t, r) == ESRK_OK);
  for (double v : r) CHECK(std::abs(v) <= 1e-14);
  double beta[5], extent = 0;
  REQUIRE(esrk_tableau_stability(t, beta, &extent) == ESRK_OK);
  CHECK(beta[4] == doctest::Approx(1.0 / 24));
  CHECK(extent == doctest::Approx(2.785).epsilon(4e-3));
  double c[4];
  REQUIRE(esrk_tableau_get(t, nullptr, nullptr, c) == ESRK_OK);
  CHECK(c[3] == 1.0);
  esrk_tableau_destroy(t);

  const double nan_b[2] = {NAN, 1.0};
  const double half[1] = {0.5};
  CHECK(esrk_tableau_from_reduced(2, half, nan_b, &t) == ESRK_STRUCTURAL_ERROR);
}

TEST_CASE("reduced tableau and a solve") {
  const double a_sub[1] = {0.5};
  const double b[2] = {0.0, 1.0};
  esrk_tableau* t = nullptr;
  REQUIRE(esrk_tableau_from_reduced(2, a_sub, b, &t) == ESRK_OK);
  double A[4];
  REQUIRE(esrk_tableau_get(t, A, nullptr, nullptr) == ESRK_OK);
  CHECK(A[2] == 0.5);
  esrk_tableau_destroy(t);

  esrk_config* cfg = nullptr;
  REQUIRE(esrk_config_create(&cfg) == ESRK_OK);
  REQUIRE(esrk_config_set(cfg, "seed", "1") == ESRK_OK);
  esrk_solve_report* rep = nullptr;
  REQUIRE(esrk_solve(cfg, "b(5)=a(2,1)^2", &rep) == ESRK_OK);
  CHECK(esrk_report_free_dimension(rep) == 30);
  if (std::string(esrk_report_status(rep)) == "Converged") {
    esrk_tableau* out = nullptr;
    REQUIRE(esrk_report_tableau(rep, &out) == ESRK_OK);
    CHECK(esrk_tableau_stages(out) == 16);
    CHECK(esrk_report_extent(rep) >= 8.0);
    esrk_tableau_destroy(out);
  }
  esrk_report_destroy(rep);

  CHECK(esrk_solve(cfg, "b(5)=a(3,1)", &rep) == ESRK_PARSE_ERROR);
  CHECK(esrk_last_error_position() == 5);
  CHECK(esrk_solve(cfg, "b(5)=b(1); b(5)=b(2)", &rep) == ESRK_CONSTRAINT_ERROR);
  esrk_config_destroy(cfg);
}

TEST_CASE("commands return summaries") {
  const auto dir = fs::temp_directory_path() / "esrk_capi_cmd";
  fs::remove_all(dir);
  fs::create_directories(dir);
  esrk_config* cfg = nullptr;
  REQUIRE(esrk_config_create(&cfg) == ESRK_OK);
  REQUIRE(esrk_config_set(cfg, "output_dir", dir.c_str()) == ESRK_OK);
  REQUIRE(esrk_config_set(cfg, "seed", "2") == ESRK_OK);

  char* summary = nullptr;
  CHECK(esrk_cmd_baseline(cfg, 0, &summary) == ESRK_USAGE_ERROR);
  REQUIRE(esrk_cmd_baseline(cfg, 4, &summary) == ESRK_OK);
  CHECK(std::string(summary).find("\"statistics\"") != std::string::npos);
  esrk_string_free(summary);
  CHECK(esrk_config_use_baseline(cfg, (dir / "baseline_stats.json").c_str()) == ESRK_OK);

  const char* h[] = {"b(5)=a(2,1)^2"};
  const auto tab = (dir / "t.json").string();
  REQUIRE(esrk_cmd_solve(cfg, h, 1, tab.c_str(), &summary) == ESRK_OK);
  esrk_string_free(summary);
  REQUIRE(esrk_cmd_validate(cfg, tab.c_str(), nullptr, &summary) == ESRK_OK);
  CHECK(std::string(summary).find("\"result\": \"PASS\"") != std::string::npos);
  esrk_string_free(summary);

  esrk_grid_spec g;
  esrk_grid_spec_default(&g);
  CHECK(g.nx == 221);
  g.nx = 5;
  g.ny = 4;
  const auto grid = (dir / "g.csv").string();
  CHECK(esrk_cmd_stability(cfg, tab.c_str(), &g, grid.c_str(), &summary) == ESRK_OK);
  esrk_string_free(summary);
  CHECK(esrk_cmd_validate(cfg, (dir / "missing.json").c_str(), nullptr, &summary) == ESRK_IO_ERROR);

  esrk_config_destroy(cfg);
  fs::remove_all(dir);
}
