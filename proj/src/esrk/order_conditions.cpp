#include "esrk/order_conditions.hpp"

#include <cmath>

#include "esrk/dual.hpp"
#include "esrk/error.hpp"
#include "esrk/reduced_model.hpp"

namespace esrk {

double OrderResiduals::max_abs() const {
  double m = 0.0;
  for (double v : r) m = std::max(m, std::abs(v));
  return m;
}

OrderResiduals order_residuals(const ButcherTableau& t) {
  const std::size_t s = t.stages();
  const auto& b = t.b();
  const auto& c = t.c();
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0, s6 = 0, s7 = 0, s8 = 0;
  for (std::size_t i = 0; i < s; ++i) {
    double ac = 0.0, ac2 = 0.0, aac = 0.0;
    for (std::size_t j = 0; j < i; ++j) {
      ac += t.a(i, j) * c[j];
      ac2 += t.a(i, j) * c[j] * c[j];
      double inner = 0.0;
      for (std::size_t k = 0; k < j; ++k) inner += t.a(j, k) * c[k];
      aac += t.a(i, j) * inner;
    }
    s1 += b[i];
    s2 += b[i] * c[i];
    s3 += b[i] * c[i] * c[i];
    s4 += b[i] * ac;
    s5 += b[i] * c[i] * c[i] * c[i];
    s6 += b[i] * ac * c[i];
    s7 += b[i] * ac2;
    s8 += b[i] * aac;
  }
  OrderResiduals out;
  out.r = {s1 - kOrderTargets[0], s2 - kOrderTargets[1], s3 - kOrderTargets[2], s4 - kOrderTargets[3],
           s5 - kOrderTargets[4], s6 - kOrderTargets[5], s7 - kOrderTargets[6], s8 - kOrderTargets[7]};
  return out;
}

ResidualJacobian order_residual_jacobian(const ReducedParameters& params,
                                         const std::vector<HeuristicExpression>& active_heuristics) {
  params.check();
  const DualReduced dual(params, active_heuristics);
  const auto r = dual.order_residuals();

  ResidualJacobian out;
  out.free = dual.free();
  const std::size_t n = out.free.size();
  out.jacobian.assign(kOrderConditions * n, 0.0);
  for (std::size_t k = 0; k < kOrderConditions; ++k) {
    out.residuals.r[k] = r[k].v;
    for (std::size_t m = 0; m < n; ++m) out.jacobian[k * n + m] = r[k].g[m];
  }
  return out;
}

} // namespace esrk
