#include "gifair/fairness/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace gifair {

namespace {

int sign(double x) { return (x > 0.0) - (x < 0.0); }

void check_objectives(std::span<const ObjectivePtr> objectives, const FederationSpec& federation) {
  if (objectives.size() != federation.num_clients())
    throw std::invalid_argument("expected one objective per client (" +
                                std::to_string(federation.num_clients()) + "), got " +
                                std::to_string(objectives.size()));
}

}  // namespace

FairnessConfig::FairnessConfig(double lambda, FederationSpec federation)
    : lambda_(lambda), federation_(std::move(federation)) {
  const double bound = lambda_max(federation_);
  if (!(lambda_ >= 0.0) || !(lambda_ < bound))
    throw std::invalid_argument("lambda=" + std::to_string(lambda_) +
                                " must satisfy 0 <= lambda < lambda_max=" + std::to_string(bound));
}

GroupLossVector group_losses(std::span<const double> client_losses,
                             const FederationSpec& federation) {
  if (client_losses.size() != federation.num_clients())
    throw std::invalid_argument("group_losses: expected " +
                                std::to_string(federation.num_clients()) + " client losses");
  for (double v : client_losses) {
    if (std::isnan(v)) throw std::invalid_argument("group_losses: NaN client loss");
    if (!(v >= 0.0) || std::isinf(v))
      throw std::invalid_argument("group_losses: client losses must be finite and nonnegative");
  }
  GroupLossVector out(federation.num_groups(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double sum = 0.0;
    for (std::size_t k : federation.members(i)) sum += client_losses[k];
    out[i] = sum / static_cast<double>(federation.group_size(i));
  }
  return out;
}

RankVector rank_coefficients(std::span<const double> group_losses,
                             const FederationSpec& federation) {
  const std::size_t d = federation.num_groups();
  if (group_losses.size() != d)
    throw std::invalid_argument("rank_coefficients: expected " + std::to_string(d) +
                                " group losses");
  std::vector<int> per_group(d, 0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      if (j != i) per_group[i] += sign(group_losses[i] - group_losses[j]);
  RankVector ranks(federation.num_clients());
  for (std::size_t k = 0; k < ranks.size(); ++k) ranks[k] = per_group[federation.group_of(k)];
  return ranks;
}

double lambda_max(const FederationSpec& federation) {
  const auto d_minus_1 = static_cast<double>(federation.num_groups() - 1);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < federation.num_clients(); ++k) {
    const double v = federation.weight(k) *
                     static_cast<double>(federation.group_size(federation.group_of(k))) /
                     d_minus_1;
    best = std::min(best, v);
  }
  return best;
}

double weight_product(std::size_t k, std::span<const int> ranks, const FairnessConfig& config) {
  const auto& fed = config.federation();
  if (ranks.size() != fed.num_clients())
    throw std::invalid_argument("weight_product: rank vector has the wrong length");
  if (config.lambda() == 0.0) return 0.0;
  const double denom = fed.weight(k) * static_cast<double>(fed.group_size(fed.group_of(k)));
  return config.lambda() * static_cast<double>(ranks[k]) / denom;
}

double local_weight(std::size_t k, std::span<const int> ranks, const FairnessConfig& config) {
  return 1.0 + weight_product(k, ranks, config);
}

double pairwise_penalty(std::span<const double> group_losses) {
  double sum = 0.0;
  for (std::size_t i = 0; i < group_losses.size(); ++i)
    for (std::size_t j = i + 1; j < group_losses.size(); ++j)
      sum += std::abs(group_losses[i] - group_losses[j]);
  return sum;
}

double objective_direct_from_losses(std::span<const double> client_losses,
                                    const FairnessConfig& config) {
  const auto& fed = config.federation();
  const auto groups = group_losses(client_losses, fed);
  double fit = 0.0;
  for (std::size_t k = 0; k < client_losses.size(); ++k) fit += fed.weight(k) * client_losses[k];
  return fit + config.lambda() * pairwise_penalty(groups);
}

double objective_weighted_from_losses(std::span<const double> client_losses,
                                      const FairnessConfig& config) {
  const auto& fed = config.federation();
  const auto ranks = rank_coefficients(group_losses(client_losses, fed), fed);
  double sum = 0.0;
  for (std::size_t k = 0; k < client_losses.size(); ++k)
    sum += fed.weight(k) * local_weight(k, ranks, config) * client_losses[k];
  return sum;
}

std::vector<double> client_losses(const ParamVector& theta,
                                  std::span<const ObjectivePtr> objectives) {
  std::vector<double> out;
  out.reserve(objectives.size());
  for (const auto& obj : objectives) out.push_back(obj->value(theta));
  return out;
}

double global_objective_direct(const ParamVector& theta,
                               std::span<const ObjectivePtr> objectives,
                               const FairnessConfig& config) {
  check_objectives(objectives, config.federation());
  return objective_direct_from_losses(client_losses(theta, objectives), config);
}

double global_objective_weighted(const ParamVector& theta,
                                 std::span<const ObjectivePtr> objectives,
                                 const FairnessConfig& config) {
  check_objectives(objectives, config.federation());
  return objective_weighted_from_losses(client_losses(theta, objectives), config);
}

ParamVector global_gradient(const ParamVector& theta, std::span<const ObjectivePtr> objectives,
                            const FairnessConfig& config) {
  const auto& fed = config.federation();
  check_objectives(objectives, fed);
  const auto ranks = rank_coefficients(group_losses(client_losses(theta, objectives), fed), fed);
  ParamVector grad = ParamVector::Zero(theta.size());
  for (std::size_t k = 0; k < objectives.size(); ++k)
    grad += fed.weight(k) * local_weight(k, ranks, config) * objectives[k]->gradient(theta);
  return grad;
}

}  // namespace gifair
