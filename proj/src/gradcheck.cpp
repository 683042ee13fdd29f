#include "doer/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace doer {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

std::vector<std::string> GradCheckReport::failing(double tolerance) const {
  std::vector<std::string> names;
  for (const auto& p : params) {
    if (!(p.max_rel_error < tolerance)) names.push_back(p.name);
  }
  return names;
}

GradCheckReport grad_check(const LossFunction& loss, const ParamRefs& params, double eps) {
  if (!(eps >= 1e-6 && eps <= 1e-4)) throw std::invalid_argument("grad_check: eps must lie in [1e-6, 1e-4]");

  zero_grads(params);
  const double base = loss(true);
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const ParamTensor* p : params) analytic.push_back(p->grad);

  const double again = loss(false);
  if (again != base) throw NumericError("grad_check: loss is not deterministic at fixed parameters");

  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    ParamTensor& p = *params[k];
    ParamCheck check{p.name, p.value.size()};
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + eps;
      const double plus = loss(false);
      p.value[i] = saved - eps;
      const double minus = loss(false);
      p.value[i] = saved;
      const double numeric = (plus - minus) / (2.0 * eps);
      double err = relative_error(analytic[k][i], numeric);
      if (!std::isfinite(err)) err = INFINITY;
      if (i == 0 || err > check.max_rel_error) {
        check.max_rel_error = err;
        check.worst_index = i;
        check.analytic = analytic[k][i];
        check.numeric = numeric;
      }
    }
    report.max_rel_error = std::max(report.max_rel_error, check.max_rel_error);
    report.params.push_back(std::move(check));
  }
  // Leave the analytic gradient in place for callers that inspect it.
  for (std::size_t k = 0; k < params.size(); ++k) params[k]->grad = analytic[k];
  return report;
}

}  // namespace doer
