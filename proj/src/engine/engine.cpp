#include "gifair/engine/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gifair/errors.hpp"

namespace gifair {

std::string_view to_string(SamplingMode mode) noexcept {
  switch (mode) {
    case SamplingMode::by_probability:
      return "by_probability";
    case SamplingMode::uniform:
      return "uniform";
  }
  return "unknown";
}

void EngineConfig::validate(const FederationSpec& federation) const {
  if (local_steps == 0) throw std::invalid_argument("local_steps must be >= 1");
  if (!(participation > 0.0) || !(participation <= 1.0))
    throw std::invalid_argument("participation must lie in (0, 1]");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  if (!(gradient_noise_sd >= 0.0) || !std::isfinite(gradient_noise_sd))
    throw std::invalid_argument("gradient_noise_sd must be finite and nonnegative");
  if (num_workers == 0) throw std::invalid_argument("num_workers must be >= 1");
  if (schedule.kind() == ScheduleKind::inverse_t &&
      schedule.gamma() < static_cast<double>(local_steps))
    throw std::invalid_argument("inverse_t schedule gamma must be >= local_steps");
  FairnessConfig check(lambda, federation);
  (void)check;
}

std::size_t cohort_size(double alpha, std::size_t num_clients) {
  if (!(alpha > 0.0) || !(alpha <= 1.0))
    throw std::invalid_argument("participation must lie in (0, 1]");
  if (num_clients == 0) throw std::invalid_argument("cohort_size: no clients");
  // The slack absorbs products such as 0.3 * 10 = 3.0000000000000004.
  const double raw = std::ceil(alpha * static_cast<double>(num_clients) - 1e-9);
  return std::clamp(static_cast<std::size_t>(std::max(raw, 1.0)), std::size_t{1}, num_clients);
}

RoundState make_initial_state(const ParamVector& theta0, std::span<const double> initial_losses,
                              const FederationSpec& federation) {
  if (initial_losses.size() != federation.num_groups())
    throw std::invalid_argument("initial losses: expected one value per group (" +
                                std::to_string(federation.num_groups()) + ")");
  for (double v : initial_losses)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("initial losses must be finite and nonnegative");
  if (!all_finite(theta0)) throw std::invalid_argument("theta0 has non-finite entries");
  RoundState s;
  s.theta_bar = theta0;
  s.cached_group_losses.assign(initial_losses.begin(), initial_losses.end());
  s.cached_client_losses.resize(federation.num_clients());
  for (std::size_t k = 0; k < federation.num_clients(); ++k)
    s.cached_client_losses[k] = initial_losses[federation.group_of(k)];
  s.ranks = rank_coefficients(s.cached_group_losses, federation);
  return s;
}

GroupLossVector initial_group_losses(const ParamVector& theta0,
                                     std::span<const ObjectivePtr> objectives,
                                     const FederationSpec& federation) {
  if (objectives.size() != federation.num_clients())
    throw std::invalid_argument("expected one objective per client");
  return group_losses(client_losses(theta0, objectives), federation);
}

Cohort sample_clients(const FederationSpec& federation, double alpha, SamplingMode mode,
                      Rng& rng) {
  const std::size_t K = federation.num_clients();
  const std::size_t m = cohort_size(alpha, K);
  Cohort cohort;
  cohort.mode = mode;
  cohort.clients.reserve(m);
  if (mode == SamplingMode::by_probability) {
    const auto w = federation.weights();
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    for (std::size_t i = 0; i < m; ++i) cohort.clients.push_back(pick(rng));
  } else {
    std::vector<std::size_t> idx(K);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, K - 1);
      std::swap(idx[i], idx[pick(rng)]);
      cohort.clients.push_back(idx[i]);
    }
  }
  return cohort;
}

BroadcastPacket make_broadcast(const RoundState& state, const Cohort& cohort,
                               const FairnessConfig& config) {
  BroadcastPacket packet;
  packet.theta = state.theta_bar;
  packet.directives.reserve(cohort.clients.size());
  for (std::size_t k : cohort.clients)
    packet.directives.push_back({k, weight_product(k, state.ranks, config)});
  return packet;
}

LocalUpdateResult local_update(const ParamVector& theta_start, const Objective& objective,
                               double weight, std::size_t local_steps,
                               const LrSchedule& schedule, std::size_t t0,
                               std::size_t batch_size, Rng& rng, double gradient_noise_sd,
                               std::size_t round, std::size_t client) {
  if (!(weight > 0.0) || !std::isfinite(weight))
    throw std::invalid_argument("local_update: weight must be positive");
  if (local_steps == 0) throw std::invalid_argument("local_update: E must be >= 1");
  if (batch_size == 0) throw std::invalid_argument("local_update: batch_size must be >= 1");
  LocalUpdateResult out;
  out.theta = theta_start;
  out.applied_weight_min = weight;
  out.applied_weight_max = weight;
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t s = 0; s < local_steps; ++s) {
    const auto batch = draw_batch(rng, objective.num_samples(), batch_size);
    ParamVector g = objective.stochastic_gradient(out.theta, batch);
    if (gradient_noise_sd > 0.0)
      for (Eigen::Index i = 0; i < g.size(); ++i) g[i] += gradient_noise_sd * noise(rng);
    out.theta -= (schedule.rate(t0 + s) * weight) * g;
    if (!all_finite(out.theta) || out.theta.norm() > kDivergenceNorm)
      throw DivergenceError("local iterate diverged (round " + std::to_string(round) +
                                ", step " + std::to_string(t0 + s + 1) + ", client " +
                                std::to_string(client) + ")",
                            round, t0 + s + 1, client);
  }
  return out;
}

ParamVector aggregate(const Cohort& cohort, std::span<const ParamVector> updates,
                      const FederationSpec& federation, SamplingMode mode) {
  if (mode != cohort.mode)
    throw std::invalid_argument("aggregate: mode " + std::string(to_string(mode)) +
                                " does not match sampling mode " +
                                std::string(to_string(cohort.mode)));
  if (updates.empty() || updates.size() != cohort.clients.size())
    throw std::invalid_argument("aggregate: need one update per cohort slot");
  std::vector<std::size_t> order(updates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cohort.clients[a] < cohort.clients[b];
  });
  const auto m = static_cast<double>(updates.size());
  ParamVector acc = ParamVector::Zero(updates.front().size());
  if (mode == SamplingMode::by_probability) {
    for (std::size_t i : order) acc += updates[i];
    acc /= m;
  } else {
    for (std::size_t i : order) acc += federation.weight(cohort.clients[i]) * updates[i];
    acc *= static_cast<double>(federation.num_clients()) / m;
  }
  return acc;
}

RoundState refresh_ranks(const RoundState& state,
                         std::span<const std::optional<double>> end_of_round_losses,
                         const FederationSpec& federation) {
  if (end_of_round_losses.size() != federation.num_clients())
    throw std::invalid_argument("refresh_ranks: expected one entry per client");
  if (state.cached_client_losses.size() != federation.num_clients())
    throw std::invalid_argument("refresh_ranks: state has the wrong client count");
  RoundState next = state;
  for (std::size_t k = 0; k < end_of_round_losses.size(); ++k)
    if (end_of_round_losses[k]) next.cached_client_losses[k] = *end_of_round_losses[k];
  next.cached_group_losses = group_losses(next.cached_client_losses, federation);
  next.ranks = rank_coefficients(next.cached_group_losses, federation);
  next.round = state.round + 1;
  return next;
}

void WeightAudit::record(double broadcast_weight, const LocalUpdateResult& result) {
  min_weight = std::min(min_weight, result.applied_weight_min);
  max_weight = std::max(max_weight, result.applied_weight_max);
  ++client_updates;
  if (result.applied_weight_min != broadcast_weight ||
      result.applied_weight_max != broadcast_weight)
    ++frozen_violations;
}

void WeightAudit::merge(const WeightAudit& other) {
  min_weight = std::min(min_weight, other.min_weight);
  max_weight = std::max(max_weight, other.max_weight);
  client_updates += other.client_updates;
  frozen_violations += other.frozen_violations;
}

bool WeightAudit::within_open_bounds() const noexcept {
  if (client_updates == 0) return true;
  return min_weight > 0.0 && max_weight < 2.0;
}

}  // namespace gifair
