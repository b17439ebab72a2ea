#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "gifair/fairness/fairness.hpp"

namespace gifair {

/// One row of the per-round metrics trajectory, measured at the aggregated
/// model. mean_loss and loss_variance are over clients (unweighted);
/// discrepancy is max - min over group losses; objective_value is H and
/// grad_norm_sq is ||grad H||^2 with ranks taken at the same point. gamma_k
/// is NaN when not computable for the run.
struct MetricsRecord {
  std::size_t round = 0;
  std::size_t step = 0;
  double mean_loss = 0.0;
  double loss_variance = 0.0;
  double discrepancy = 0.0;
  double objective_value = 0.0;
  double grad_norm_sq = 0.0;
  double gamma_k = std::numeric_limits<double>::quiet_NaN();
};

/// Population variance. Throws std::invalid_argument on empty input.
double fairness_variance(std::span<const double> per_unit_metrics);

/// max - min. Throws std::invalid_argument for fewer than two entries.
double discrepancy(std::span<const double> group_metrics);

/// Mean, variance over clients and group discrepancy of one per-client
/// metric (loss or accuracy).
struct SpreadSummary {
  double mean = 0.0;
  double variance = 0.0;
  double discrepancy = 0.0;
};

SpreadSummary summarize_spread(std::span<const double> per_client, const FederationSpec& federation);

/// Evaluates MetricsRecord rows for a fixed set of client objectives.
class MetricsEvaluator {
 public:
  MetricsEvaluator(std::vector<ObjectivePtr> objectives, FairnessConfig config);

  MetricsRecord evaluate(const ParamVector& theta, std::size_t round, std::size_t step,
                         double gamma_k = std::numeric_limits<double>::quiet_NaN()) const;

 private:
  std::vector<ObjectivePtr> objectives_;
  FairnessConfig config_;
};

}  // namespace gifair
