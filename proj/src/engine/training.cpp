#include <atomic>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>

#include "gifair/engine/engine.hpp"
#include "gifair/errors.hpp"

namespace gifair {

void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& task) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    const std::size_t count = std::min(workers, n);
    pool.reserve(count);
    for (std::size_t w = 0; w < count; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
          try {
            task(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

GifairEngine::GifairEngine(EngineConfig config, FederationSpec federation,
                           std::vector<ObjectivePtr> objectives, RoundState initial)
    : config_(std::move(config)),
      fairness_(config_.lambda, federation),
      objectives_(std::move(objectives)),
      state_(std::move(initial)) {
  config_.validate(federation);
  if (objectives_.size() != federation.num_clients())
    throw std::invalid_argument("expected one objective per client (" +
                                std::to_string(federation.num_clients()) + "), got " +
                                std::to_string(objectives_.size()));
  const auto dim = static_cast<std::size_t>(state_.theta_bar.size());
  for (const auto& obj : objectives_) {
    if (!obj) throw std::invalid_argument("null objective");
    if (obj->dim() != dim)
      throw std::invalid_argument("objective dimension " + std::to_string(obj->dim()) +
                                  " does not match theta dimension " + std::to_string(dim));
  }
  if (state_.ranks.size() != federation.num_clients() ||
      state_.cached_client_losses.size() != federation.num_clients() ||
      state_.cached_group_losses.size() != federation.num_groups())
    throw std::invalid_argument("round state does not match the federation");
}

const RoundState& GifairEngine::run_round() {
  const auto& fed = fairness_.federation();
  const std::size_t c = state_.round;
  Rng sampler = derive_stream(config_.master_seed, StreamTag::sampling, c);
  last_cohort_ = sample_clients(fed, config_.participation, config_.sampling, sampler);
  last_packet_ = make_broadcast(state_, last_cohort_, fairness_);

  const std::size_t m = last_cohort_.clients.size();
  // Repeated draws of one client get distinct streams.
  std::vector<std::size_t> occurrence(m, 0);
  {
    std::vector<std::size_t> seen(fed.num_clients(), 0);
    for (std::size_t i = 0; i < m; ++i) occurrence[i] = seen[last_cohort_.clients[i]]++;
  }

  std::vector<LocalUpdateResult> results(m);
  std::vector<double> slot_losses(m, 0.0);
  const bool loss_at_iterate = config_.refresh_loss == RefreshLoss::local_iterate;
  parallel_for(m, config_.num_workers, [&](std::size_t i) {
    const std::size_t k = last_cohort_.clients[i];
    Rng rng = derive_stream(config_.master_seed, StreamTag::local_update, c, k, occurrence[i]);
    results[i] = local_update(last_packet_.theta, *objectives_[k],
                              1.0 + last_packet_.directives[i].weight_product,
                              config_.local_steps, config_.schedule, state_.global_step,
                              config_.batch_size, rng, config_.gradient_noise_sd, c, k);
    if (loss_at_iterate) slot_losses[i] = objectives_[k]->value(results[i].theta);
  });

  std::vector<ParamVector> updates;
  updates.reserve(m);
  for (auto& r : results) updates.push_back(r.theta);
  ParamVector theta_bar = aggregate(last_cohort_, updates, fed, config_.sampling);
  const std::size_t end_step = state_.global_step + config_.local_steps;
  if (!all_finite(theta_bar) || theta_bar.norm() > kDivergenceNorm)
    throw DivergenceError("aggregated model diverged (round " + std::to_string(c) + ")", c,
                          end_step, fed.num_clients());

  std::vector<std::optional<double>> losses(fed.num_clients());
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t k = last_cohort_.clients[i];
    losses[k] = loss_at_iterate ? slot_losses[i] : objectives_[k]->value(theta_bar);
    audit_.record(1.0 + last_packet_.directives[i].weight_product, results[i]);
  }

  RoundState next = refresh_ranks(state_, losses, fed);
  next.theta_bar = std::move(theta_bar);
  next.global_step = end_step;
  state_ = std::move(next);
  return state_;
}

namespace {

TrainingResult drive(GifairEngine& engine, const EngineConfig& config,
                     std::span<const ObjectivePtr> objectives, const TrainingHooks& hooks) {
  TrainingResult out;
  std::optional<MetricsEvaluator> metrics;
  if (config.metrics_every > 0)
    metrics.emplace(std::vector<ObjectivePtr>(objectives.begin(), objectives.end()),
                    engine.fairness());
  const double gamma = hooks.gamma_k.value_or(std::numeric_limits<double>::quiet_NaN());
  while (!engine.finished()) {
    const auto& s = engine.run_round();
    if (metrics && (s.round % config.metrics_every == 0 || s.round == config.rounds))
      out.trajectory.push_back(metrics->evaluate(s.theta_bar, s.round, s.global_step, gamma));
    if (hooks.on_round) hooks.on_round(s);
  }
  out.theta = engine.state().theta_bar;
  out.final_state = engine.state();
  out.audit = engine.audit();
  return out;
}

}  // namespace

TrainingResult run_training(const EngineConfig& config, const FederationSpec& federation,
                            std::span<const ObjectivePtr> objectives, const ParamVector& theta0,
                            std::span<const double> initial_losses,
                            const TrainingHooks& hooks) {
  return resume_training(config, federation, objectives,
                         make_initial_state(theta0, initial_losses, federation), hooks);
}

TrainingResult resume_training(const EngineConfig& config, const FederationSpec& federation,
                               std::span<const ObjectivePtr> objectives, RoundState state,
                               const TrainingHooks& hooks) {
  if (state.round > config.rounds)
    throw std::invalid_argument("saved state is past the configured number of rounds");
  GifairEngine engine(config, federation,
                      std::vector<ObjectivePtr>(objectives.begin(), objectives.end()),
                      std::move(state));
  return drive(engine, config, objectives, hooks);
}

}  // namespace gifair
