// esrk: command-line front end over the C API.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "esrk/esrk.h"

namespace {

int exit_code(esrk_status st) {
  switch (st) {
  case ESRK_OK: return 0;
  case ESRK_FAILURE:
  case ESRK_INTERNAL_ERROR: return 1;
  default: return 2;
  }
}

int report_error(esrk_status st) {
  std::fprintf(stderr, "error: %s\n", esrk_last_error());
  return exit_code(st);
}

int emit(esrk_status st, char* summary) {
  if (summary) {
    std::fputs(summary, stdout);
    esrk_string_free(summary);
  }
  if (st != ESRK_OK && st != ESRK_FAILURE) return report_error(st);
  return exit_code(st);
}

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::string seed, stages, out, required_extent;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "campaign config file (JSON)");
  cmd->add_option("--set", c.sets, "override a config value, key=value (repeatable)");
  cmd->add_option("--seed", c.seed, "campaign seed");
  cmd->add_option("--stages", c.stages, "stage count s");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--required-extent", c.required_extent, "stability target on the negative real axis");
}

esrk_status build_config(const Common& c, esrk_config** cfg) {
  esrk_status st = c.config_path.empty() ? esrk_config_create(cfg) : esrk_config_load(c.config_path.c_str(), cfg);
  if (st != ESRK_OK) return st;
  auto set = [&](const char* key, const std::string& value) {
    if (st == ESRK_OK && !value.empty()) st = esrk_config_set(*cfg, key, value.c_str());
  };
  set("seed", c.seed);
  set("s", c.stages);
  set("output_dir", c.out);
  set("solver.required_extent", c.required_extent);
  for (const auto& kv : c.sets) {
    if (st != ESRK_OK) break;
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      return ESRK_USAGE_ERROR;
    }
    st = esrk_config_set(*cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
  }
  if (st == ESRK_OK && !c.out.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(c.out, ec);
  }
  return st;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design, certify and benchmark 16-stage low-storage ESRK schemes"};
  app.require_subcommand(1);

  Common common;
  long runs = -1, budget = -1;
  std::string baseline_stats, tableau, output, problem, grid;
  std::vector<std::string> heuristics;
  std::vector<double> steps;
  esrk_grid_spec spec;
  esrk_grid_spec_default(&spec);

  auto* baseline = app.add_subcommand("baseline", "heuristic-free solves and their iteration statistics");
  add_common(baseline, common);
  baseline->add_option("--runs", runs, "number of seeded solves")->required();

  auto* discover = app.add_subcommand("discover", "run a heuristic discovery campaign");
  add_common(discover, common);
  discover->add_option("--budget", budget, "number of heuristic evaluations")->required();
  discover->add_option("--baseline", baseline_stats, "baseline statistics file supplying the mean");

  auto* solve = app.add_subcommand("solve", "solve for one scheme, optionally under heuristics");
  add_common(solve, common);
  solve->add_option("--heuristic", heuristics, "heuristic expression, e.g. \"b(5)=a(2,1)^2\" (repeatable)");
  solve->add_option("--output", output, "tableau file (default <out>/tableau.json)");

  auto* validate = app.add_subcommand("validate", "certify a tableau file");
  add_common(validate, common);
  validate->add_option("tableau", tableau, "tableau file")->required();
  validate->add_option("--grid", grid, "also write a stability grid CSV here");

  auto* converge = app.add_subcommand("converge", "temporal convergence study on a benchmark problem");
  add_common(converge, common);
  converge->add_option("tableau", tableau, "tableau file")->required();
  converge->add_option("--problem", problem, "brusselator1d, brusselator2d or stokes")->required();
  converge->add_option("--output", output, "study CSV (default <out>/<problem>_study.csv)");
  converge->add_option("--steps", steps, "step sizes (default: the problem's suggested grid)")->delimiter(',');

  auto* stability = app.add_subcommand("stability", "sample |R(z)| on a rectangle of the complex plane");
  add_common(stability, common);
  stability->add_option("tableau", tableau, "tableau file")->required();
  stability->add_option("--output", output, "grid CSV")->required();
  stability->add_option("--re-min", spec.re_min);
  stability->add_option("--re-max", spec.re_max);
  stability->add_option("--im-min", spec.im_min);
  stability->add_option("--im-max", spec.im_max);
  stability->add_option("--nx", spec.nx);
  stability->add_option("--ny", spec.ny);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  esrk_config* cfg = nullptr;
  esrk_status st = build_config(common, &cfg);
  if (st != ESRK_OK) {
    esrk_config_destroy(cfg);
    return report_error(st);
  }
  if (!steps.empty()) {
    std::string list = "[";
    char buf[40];
    for (std::size_t k = 0; k < steps.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", steps[k]);
      list += (k ? "," : "") + std::string(buf);
    }
    list += "]";
    if ((st = esrk_config_set(cfg, "benchmarks.steps", list.c_str())) != ESRK_OK) {
      esrk_config_destroy(cfg);
      return report_error(st);
    }
  }

  char* summary = nullptr;
  if (baseline->parsed()) {
    st = esrk_cmd_baseline(cfg, runs, &summary);
  } else if (discover->parsed()) {
    st = baseline_stats.empty() ? ESRK_OK : esrk_config_use_baseline(cfg, baseline_stats.c_str());
    if (st == ESRK_OK) st = esrk_cmd_discover(cfg, budget, &summary);
  } else if (solve->parsed()) {
    std::vector<const char*> texts;
    for (const auto& h : heuristics) texts.push_back(h.c_str());
    st = esrk_cmd_solve(cfg, texts.data(), texts.size(), output.empty() ? nullptr : output.c_str(), &summary);
  } else if (validate->parsed()) {
    st = esrk_cmd_validate(cfg, tableau.c_str(), grid.empty() ? nullptr : grid.c_str(), &summary);
  } else if (converge->parsed()) {
    st = esrk_cmd_converge(cfg, tableau.c_str(), problem.c_str(), output.empty() ? nullptr : output.c_str(), &summary);
  } else if (stability->parsed()) {
    st = esrk_cmd_stability(cfg, tableau.c_str(), &spec, output.c_str(), &summary);
  }
  esrk_config_destroy(cfg);
  return emit(st, summary);
}
