#include "esrk/esrk.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "esrk/error.hpp"
#include "esrk/interface.hpp"

struct esrk_config {
  esrk::CampaignConfig cfg;
};

struct esrk_tableau {
  esrk::ButcherTableau t;
};

struct esrk_solve_report {
  esrk::SolveReport rep;
};

namespace {

thread_local std::string g_error;
thread_local long g_position = -1;

template <typename F>
esrk_status guard(F&& fn) {
  g_error.clear();
  g_position = -1;
  try {
    return fn();
  } catch (const esrk::ParseError& e) {
    g_error = e.what();
    g_position = long(e.position());
    return ESRK_PARSE_ERROR;
  } catch (const esrk::UsageError& e) {
    g_error = e.what();
    return ESRK_USAGE_ERROR;
  } catch (const esrk::IoError& e) {
    g_error = e.what();
    return ESRK_IO_ERROR;
  } catch (const esrk::ConstraintError& e) {
    g_error = e.what();
    return ESRK_CONSTRAINT_ERROR;
  } catch (const esrk::StructuralError& e) {
    g_error = e.what();
    return ESRK_STRUCTURAL_ERROR;
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
    return ESRK_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    g_error = e.what();
    return ESRK_INTERNAL_ERROR;
  }
}

esrk_status null_arg(const char* what) {
  g_error = std::string("null argument: ") + what;
  g_position = -1;
  return ESRK_USAGE_ERROR;
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

esrk_status finish(const esrk::CommandResult& r, char** summary) {
  if (summary) *summary = copy_string(r.summary);
  return r.exit_code == 0 ? ESRK_OK : ESRK_FAILURE;
}

std::string opt(const char* s) { return s ? std::string(s) : std::string(); }

} // namespace

extern "C" {

const char* esrk_last_error(void) { return g_error.c_str(); }
long esrk_last_error_position(void) { return g_position; }
const char* esrk_version(void) { return "1.0.0"; }
void esrk_string_free(char* s) { std::free(s); }

esrk_status esrk_config_create(esrk_config** out) {
  if (!out) return null_arg("out");
  return guard([&] {
    *out = new esrk_config{};
    return ESRK_OK;
  });
}

esrk_status esrk_config_load(const char* path, esrk_config** out) {
  if (!path || !out) return null_arg("path/out");
  return guard([&] {
    *out = new esrk_config{esrk::CampaignConfig::load(path)};
    return ESRK_OK;
  });
}

esrk_status esrk_config_parse(const char* text, esrk_config** out) {
  if (!text || !out) return null_arg("text/out");
  return guard([&] {
    *out = new esrk_config{esrk::CampaignConfig::from_text(text)};
    return ESRK_OK;
  });
}

esrk_status esrk_config_set(esrk_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return null_arg("cfg/key/value");
  return guard([&] {
    cfg->cfg.set(key, value);
    return ESRK_OK;
  });
}

esrk_status esrk_config_use_baseline(esrk_config* cfg, const char* stats_path) {
  if (!cfg || !stats_path) return null_arg("cfg/stats_path");
  return guard([&] {
    cfg->cfg.search.baseline_mean = esrk::read_baseline_mean(stats_path);
    return ESRK_OK;
  });
}

esrk_status esrk_config_to_text(const esrk_config* cfg, char** out) {
  if (!cfg || !out) return null_arg("cfg/out");
  return guard([&] {
    *out = copy_string(cfg->cfg.to_text());
    return ESRK_OK;
  });
}

void esrk_config_destroy(esrk_config* cfg) { delete cfg; }

esrk_status esrk_tableau_from_reduced(size_t s, const double* a_sub, const double* b, esrk_tableau** out) {
  if (!b || !out || (s > 1 && !a_sub)) return null_arg("a_sub/b/out");
  return guard([&] {
    esrk::ReducedParameters p;
    p.s = s;
    p.a_sub.assign(a_sub, a_sub + (s > 0 ? s - 1 : 0));
    p.b.assign(b, b + s);
    p.check();
    *out = new esrk_tableau{esrk::apply_constraints(p)};
    return ESRK_OK;
  });
}

esrk_status esrk_tableau_from_full(size_t s, const double* A, const double* b, esrk_tableau** out) {
  if (!A || !b || !out) return null_arg("A/b/out");
  return guard([&] {
    std::vector<std::vector<double>> rows(s);
    for (size_t i = 0; i < s; ++i) rows[i].assign(A + i * s, A + (i + 1) * s);
    *out = new esrk_tableau{esrk::ButcherTableau(rows, std::vector<double>(b, b + s))};
    return ESRK_OK;
  });
}

esrk_status esrk_tableau_load(const char* path, esrk_tableau** out) {
  if (!path || !out) return null_arg("path/out");
  return guard([&] {
    *out = new esrk_tableau{esrk::read_tableau_document(path).tableau};
    return ESRK_OK;
  });
}

size_t esrk_tableau_stages(const esrk_tableau* t) { return t ? t->t.stages() : 0; }

esrk_status esrk_tableau_get(const esrk_tableau* t, double* A, double* b, double* c) {
  if (!t) return null_arg("t");
  return guard([&] {
    const size_t s = t->t.stages();
    for (size_t i = 0; i < s; ++i) {
      if (A)
        for (size_t j = 0; j < s; ++j) A[i * s + j] = t->t.A()[i][j];
      if (b) b[i] = t->t.b()[i];
      if (c) c[i] = t->t.c()[i];
    }
    return ESRK_OK;
  });
}

esrk_status esrk_tableau_order_residuals(const esrk_tableau* t, double residuals[8]) {
  if (!t || !residuals) return null_arg("t/residuals");
  return guard([&] {
    const auto r = esrk::order_residuals(t->t);
    for (size_t k = 0; k < esrk::kOrderConditions; ++k) residuals[k] = r.r[k];
    return ESRK_OK;
  });
}

esrk_status esrk_tableau_stability(const esrk_tableau* t, double* beta, double* extent) {
  if (!t) return null_arg("t");
  return guard([&] {
    const auto rep = esrk::validate_scheme(t->t, esrk::StabilityConfig{});
    if (beta)
      for (size_t k = 0; k < rep.beta.size(); ++k) beta[k] = rep.beta[k];
    if (extent) *extent = rep.real_axis_extent;
    return ESRK_OK;
  });
}

void esrk_tableau_destroy(esrk_tableau* t) { delete t; }

esrk_status esrk_solve(const esrk_config* cfg, const char* heuristics, esrk_solve_report** out) {
  if (!cfg || !out) return null_arg("cfg/out");
  return guard([&] {
    const auto exprs = heuristics ? esrk::parse_expression_list(heuristics, cfg->cfg.s)
                                  : std::vector<esrk::HeuristicExpression>{};
    *out = new esrk_solve_report{esrk::solve(cfg->cfg.s, exprs, cfg->cfg.effective_solver())};
    return ESRK_OK;
  });
}

const char* esrk_report_status(const esrk_solve_report* r) { return r ? esrk::to_string(r->rep.status) : ""; }
long esrk_report_iterations(const esrk_solve_report* r) { return r ? r->rep.iterations : 0; }
double esrk_report_residual_norm(const esrk_solve_report* r) { return r ? r->rep.residual_norm : 0.0; }
double esrk_report_extent(const esrk_solve_report* r) { return r ? r->rep.stability.real_axis_extent : 0.0; }
int esrk_report_free_dimension(const esrk_solve_report* r) { return r ? r->rep.free_dimension : 0; }

esrk_status esrk_report_tableau(const esrk_solve_report* r, esrk_tableau** out) {
  if (!r || !out) return null_arg("r/out");
  if (!r->rep.tableau) {
    g_error = "solve did not converge";
    return ESRK_FAILURE;
  }
  return guard([&] {
    *out = new esrk_tableau{*r->rep.tableau};
    return ESRK_OK;
  });
}

void esrk_report_destroy(esrk_solve_report* r) { delete r; }

void esrk_grid_spec_default(esrk_grid_spec* g) {
  if (!g) return;
  const esrk::GridSpec d;
  *g = {d.re_min, d.re_max, d.im_min, d.im_max, d.nx, d.ny};
}

esrk_status esrk_cmd_baseline(const esrk_config* cfg, long runs, char** summary) {
  if (!cfg) return null_arg("cfg");
  return guard([&] { return finish(esrk::cmd_baseline(runs, cfg->cfg), summary); });
}

esrk_status esrk_cmd_discover(const esrk_config* cfg, long budget, char** summary) {
  if (!cfg) return null_arg("cfg");
  return guard([&] { return finish(esrk::cmd_discover(budget, cfg->cfg), summary); });
}

esrk_status esrk_cmd_solve(const esrk_config* cfg, const char* const* heuristics, size_t count,
                           const char* tableau_path, char** summary) {
  if (!cfg || (count > 0 && !heuristics)) return null_arg("cfg/heuristics");
  return guard([&] {
    std::vector<std::string> texts;
    for (size_t k = 0; k < count; ++k) texts.push_back(opt(heuristics[k]));
    return finish(esrk::cmd_solve(texts, cfg->cfg, opt(tableau_path)), summary);
  });
}

esrk_status esrk_cmd_validate(const esrk_config* cfg, const char* tableau_path, const char* grid_path,
                              char** summary) {
  if (!cfg || !tableau_path) return null_arg("cfg/tableau_path");
  return guard([&] { return finish(esrk::cmd_validate(tableau_path, cfg->cfg, opt(grid_path)), summary); });
}

esrk_status esrk_cmd_converge(const esrk_config* cfg, const char* tableau_path, const char* problem,
                              const char* study_path, char** summary) {
  if (!cfg || !tableau_path || !problem) return null_arg("cfg/tableau_path/problem");
  return guard([&] { return finish(esrk::cmd_converge(tableau_path, problem, cfg->cfg, opt(study_path)), summary); });
}

esrk_status esrk_cmd_stability(const esrk_config* cfg, const char* tableau_path, const esrk_grid_spec* grid,
                               const char* grid_path, char** summary) {
  if (!cfg || !tableau_path || !grid_path) return null_arg("cfg/tableau_path/grid_path");
  return guard([&] {
    esrk::GridSpec g;
    if (grid) g = {grid->re_min, grid->re_max, grid->im_min, grid->im_max, grid->nx, grid->ny};
    return finish(esrk::cmd_stability(tableau_path, g, cfg->cfg, grid_path), summary);
  });
}

} // extern "C"
