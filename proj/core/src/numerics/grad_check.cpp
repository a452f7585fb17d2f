#include "emfend/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "emfend/error.hpp"

namespace emfend::numerics {

bool GradCheckReport::all_passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
}

double GradCheckReport::worst_error() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.max_relative_error);
  return worst;
}

void GradCheckReport::print(std::ostream& out) const {
  char line[256];
  for (const auto& e : entries) {
    std::snprintf(line, sizeof line, "  %-4s %-44s coords=%-6zu max_rel_err=%.3e\n",
                  e.passed ? "ok" : "FAIL", e.name.c_str(), e.coordinates, e.max_relative_error);
    out << line;
  }
}

GradCheckReport grad_check(const std::function<Var()>& forward, ParameterStore& params,
                           const GradCheckOptions& options) {
  const double base_a = forward().value().item();
  const double base_b = forward().value().item();
  if (base_a != base_b) {
    throw NumericError("grad_check: forward is not deterministic (" + std::to_string(base_a) +
                       " vs " + std::to_string(base_b) + ")");
  }

  Var loss = forward();
  backward(loss, params);
  if (options.after_backward) options.after_backward(params);

  GradCheckReport report;
  report.tolerance = options.tolerance;
  for (const auto& [name, entry] : params.entries()) {
    if (!entry.trainable) continue;
    const Tensor analytic = entry.var.grad();
    Tensor& value = entry.var.node()->value;
    GradCheckEntry result;
    result.name = name;
    result.coordinates = value.size();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + options.epsilon;
      const double plus = forward().value().item();
      value[i] = saved - options.epsilon;
      const double minus = forward().value().item();
      value[i] = saved;
      const double numeric = (plus - minus) / (2.0 * options.epsilon);
      const double a = analytic[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      result.max_relative_error = std::max(result.max_relative_error, std::abs(a - numeric) / denom);
      result.max_abs_analytic = std::max(result.max_abs_analytic, std::abs(a));
    }
    result.passed = result.max_relative_error < options.tolerance;
    report.entries.push_back(std::move(result));
  }
  return report;
}

}  // namespace emfend::numerics
