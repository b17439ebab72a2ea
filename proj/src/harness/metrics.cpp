#include "gifair/harness/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace gifair {

double fairness_variance(std::span<const double> per_unit_metrics) {
  if (per_unit_metrics.empty()) throw std::invalid_argument("fairness_variance: empty input");
  double mean = 0.0;
  for (double v : per_unit_metrics) mean += v;
  mean /= static_cast<double>(per_unit_metrics.size());
  double acc = 0.0;
  for (double v : per_unit_metrics) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(per_unit_metrics.size());
}

double discrepancy(std::span<const double> group_metrics) {
  if (group_metrics.size() < 2)
    throw std::invalid_argument("discrepancy: need at least two groups");
  const auto [lo, hi] = std::minmax_element(group_metrics.begin(), group_metrics.end());
  return *hi - *lo;
}

SpreadSummary summarize_spread(std::span<const double> per_client,
                               const FederationSpec& federation) {
  if (per_client.size() != federation.num_clients())
    throw std::invalid_argument("summarize_spread: expected one value per client");
  SpreadSummary out;
  for (double v : per_client) out.mean += v;
  out.mean /= static_cast<double>(per_client.size());
  out.variance = fairness_variance(per_client);
  std::vector<double> groups(federation.num_groups(), 0.0);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t k : federation.members(i)) groups[i] += per_client[k];
    groups[i] /= static_cast<double>(federation.group_size(i));
  }
  out.discrepancy = discrepancy(groups);
  return out;
}

MetricsEvaluator::MetricsEvaluator(std::vector<ObjectivePtr> objectives, FairnessConfig config)
    : objectives_(std::move(objectives)), config_(std::move(config)) {
  if (objectives_.size() != config_.federation().num_clients())
    throw std::invalid_argument("MetricsEvaluator: expected one objective per client");
}

MetricsRecord MetricsEvaluator::evaluate(const ParamVector& theta, std::size_t round,
                                         std::size_t step, double gamma_k) const {
  const auto& fed = config_.federation();
  const auto losses = client_losses(theta, objectives_);
  const auto spread = summarize_spread(losses, fed);
  const auto ranks = rank_coefficients(group_losses(losses, fed), fed);

  ParamVector grad = ParamVector::Zero(theta.size());
  for (std::size_t k = 0; k < objectives_.size(); ++k)
    grad += fed.weight(k) * local_weight(k, ranks, config_) * objectives_[k]->gradient(theta);

  MetricsRecord rec;
  rec.round = round;
  rec.step = step;
  rec.mean_loss = spread.mean;
  rec.loss_variance = spread.variance;
  rec.discrepancy = spread.discrepancy;
  rec.objective_value = objective_direct_from_losses(losses, config_);
  rec.grad_norm_sq = grad.squaredNorm();
  rec.gamma_k = gamma_k;
  return rec;
}

}  // namespace gifair
