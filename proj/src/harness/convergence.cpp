#include "gifair/harness/convergence.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace gifair {

double log_log_slope(std::span<const double> steps, std::span<const double> values) {
  if (steps.size() != values.size())
    throw std::invalid_argument("log_log_slope: length mismatch");
  if (steps.size() < 10)
    throw std::invalid_argument("log_log_slope: need at least 10 points, got " +
                                std::to_string(steps.size()));
  const auto n = static_cast<double>(steps.size());
  double sx = 0.0, sy = 0.0;
  std::vector<double> x(steps.size()), y(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!(steps[i] > 0.0)) throw std::invalid_argument("log_log_slope: nonpositive step");
    if (!(values[i] > 0.0) || !std::isfinite(values[i]))
      throw std::invalid_argument("log_log_slope: nonpositive value at index " +
                                  std::to_string(i));
    x[i] = std::log(steps[i]);
    y[i] = std::log(values[i]);
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("log_log_slope: all steps identical");
  return sxy / sxx;
}

double convergence_slope(std::span<const MetricsRecord> trajectory, SlopeField field,
                         std::size_t first_step, std::size_t last_step, double h_star) {
  if (field == SlopeField::objective_gap && !std::isfinite(h_star))
    throw std::invalid_argument("convergence_slope: objective_gap needs a finite h_star");
  std::vector<double> steps, values;
  for (const auto& rec : trajectory) {
    if (rec.step < first_step || rec.step > last_step) continue;
    steps.push_back(static_cast<double>(rec.step));
    values.push_back(field == SlopeField::objective_gap ? rec.objective_value - h_star
                                                        : rec.grad_norm_sq);
  }
  return log_log_slope(steps, values);
}

}  // namespace gifair
