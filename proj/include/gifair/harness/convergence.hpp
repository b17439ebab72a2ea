#pragma once

#include <cstddef>
#include <limits>
#include <span>

#include "gifair/harness/metrics.hpp"

namespace gifair {

enum class SlopeField { objective_gap, grad_norm_sq };

/// Least-squares slope of log(values) against log(steps). Needs at least 10
/// points; rejects nonpositive steps or values.
double log_log_slope(std::span<const double> steps, std::span<const double> values);

/// Slope over the rows whose `step` lies in [first_step, last_step]. For
/// objective_gap the value is objective_value - h_star, so h_star is required.
double convergence_slope(std::span<const MetricsRecord> trajectory, SlopeField field,
                         std::size_t first_step, std::size_t last_step,
                         double h_star = std::numeric_limits<double>::quiet_NaN());

}  // namespace gifair
