#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gifair/engine/schedule.hpp"
#include "gifair/fairness/fairness.hpp"
#include "gifair/harness/metrics.hpp"
#include "gifair/model/rng.hpp"

namespace gifair {

/// by_probability: ceil(alpha K) i.i.d. draws proportional to p_k (with
/// replacement), aggregated by a plain mean.
/// uniform: ceil(alpha K) distinct clients drawn uniformly (without
/// replacement), aggregated as (K / ceil(alpha K)) sum_k p_k theta_k.
enum class SamplingMode { by_probability, uniform };

/// Which loss feeds the end-of-round rank refresh: the client's last local
/// iterate (the algorithm as written) or the freshly aggregated model.
enum class RefreshLoss { local_iterate, aggregate };

std::string_view to_string(SamplingMode mode) noexcept;

/// Iterates with a non-finite entry or a norm above this abort training.
inline constexpr double kDivergenceNorm = 1e12;

struct EngineConfig {
  std::size_t rounds = 1;
  std::size_t local_steps = 1;
  double participation = 1.0;
  std::size_t batch_size = 1;
  LrSchedule schedule = LrSchedule::constant(0.01);
  SamplingMode sampling = SamplingMode::by_probability;
  double lambda = 0.0;
  std::uint64_t master_seed = 0;
  /// Standard deviation of i.i.d. Gaussian noise added to every coordinate
  /// of every local stochastic gradient (0 disables).
  double gradient_noise_sd = 0.0;
  RefreshLoss refresh_loss = RefreshLoss::local_iterate;
  /// Emit a metrics row every this many rounds (and after the last round);
  /// 0 disables metrics.
  std::size_t metrics_every = 1;
  /// Worker threads for client updates within a round. Results do not depend
  /// on this value.
  std::size_t num_workers = 1;

  /// Throws std::invalid_argument on any violated constraint, including
  /// lambda >= lambda_max(federation).
  void validate(const FederationSpec& federation) const;
};

/// ceil(alpha K), computed so that e.g. alpha = 0.3, K = 10 gives 3.
std::size_t cohort_size(double alpha, std::size_t num_clients);

/// Server-side state between rounds.
struct RoundState {
  ParamVector theta_bar;
  RankVector ranks;
  GroupLossVector cached_group_losses;
  /// Most recent loss reported by each client (seeded from the initial group
  /// losses); unsampled clients keep their cached value.
  std::vector<double> cached_client_losses;
  std::size_t round = 0;
  std::size_t global_step = 0;
};

/// Initial state from theta0 and the initial group losses {L_i}.
RoundState make_initial_state(const ParamVector& theta0, std::span<const double> initial_losses,
                              const FederationSpec& federation);

/// Group losses of theta0, a convenient source for the initial {L_i}.
GroupLossVector initial_group_losses(const ParamVector& theta0,
                                     std::span<const ObjectivePtr> objectives,
                                     const FederationSpec& federation);

struct Cohort {
  SamplingMode mode = SamplingMode::by_probability;
  /// Client index of every update slot, in draw order. May repeat in
  /// by_probability mode.
  std::vector<std::size_t> clients;
};

Cohort sample_clients(const FederationSpec& federation, double alpha, SamplingMode mode,
                      Rng& rng);

/// What a selected client receives: the model and its own weight product.
/// Nothing else about the client (p_k, group size, rank) is ever sent.
struct ClientDirective {
  std::size_t client = 0;
  double weight_product = 0.0;
};

struct BroadcastPacket {
  ParamVector theta;
  std::vector<ClientDirective> directives;
};

BroadcastPacket make_broadcast(const RoundState& state, const Cohort& cohort,
                               const FairnessConfig& config);

struct LocalUpdateResult {
  ParamVector theta;
  /// Smallest and largest weight applied across the E steps.
  double applied_weight_min = 0.0;
  double applied_weight_max = 0.0;
};

/// E steps of theta <- theta - eta(t0 + s) * weight * (g + noise) where g is
/// a minibatch gradient of `objective`; `weight` is frozen for the call.
/// Throws DivergenceError (step context only; round/client set by callers
/// through `round` and `client`).
LocalUpdateResult local_update(const ParamVector& theta_start, const Objective& objective,
                               double weight, std::size_t local_steps,
                               const LrSchedule& schedule, std::size_t t0,
                               std::size_t batch_size, Rng& rng, double gradient_noise_sd = 0.0,
                               std::size_t round = 0, std::size_t client = 0);

/// Mode-appropriate average of the slot updates, reduced in ascending client
/// order. Throws if `mode` differs from the mode the cohort was sampled with.
ParamVector aggregate(const Cohort& cohort, std::span<const ParamVector> updates,
                      const FederationSpec& federation, SamplingMode mode);

/// Overwrites the cached loss of every client with a value, recomputes the
/// group losses and ranks, and advances the round counter. theta_bar and
/// global_step are left to the caller.
RoundState refresh_ranks(const RoundState& state,
                         std::span<const std::optional<double>> end_of_round_losses,
                         const FederationSpec& federation);

/// Applied-weight instrumentation gathered over a run.
struct WeightAudit {
  double min_weight = std::numeric_limits<double>::infinity();
  double max_weight = -std::numeric_limits<double>::infinity();
  std::size_t client_updates = 0;
  /// Client updates whose applied weight differed from the round-start
  /// broadcast product.
  std::size_t frozen_violations = 0;

  void record(double broadcast_weight, const LocalUpdateResult& result);
  void merge(const WeightAudit& other);
  /// Every applied weight lies in the open interval (0, 2).
  bool within_open_bounds() const noexcept;
};

struct TrainingHooks {
  /// Value written to every metrics row's gamma_k column.
  std::optional<double> gamma_k;
  /// Called after every completed round.
  std::function<void(const RoundState&)> on_round;
};

struct TrainingResult {
  ParamVector theta;
  RoundState final_state;
  std::vector<MetricsRecord> trajectory;
  WeightAudit audit;
};

/// One fair-training round driven by a single controller: sample, broadcast,
/// local updates (possibly on worker threads), aggregate, refresh.
class GifairEngine {
 public:
  GifairEngine(EngineConfig config, FederationSpec federation,
               std::vector<ObjectivePtr> objectives, RoundState initial);

  /// Runs one round and returns the updated state.
  const RoundState& run_round();

  const RoundState& state() const noexcept { return state_; }
  const WeightAudit& audit() const noexcept { return audit_; }
  const EngineConfig& config() const noexcept { return config_; }
  const FairnessConfig& fairness() const noexcept { return fairness_; }
  bool finished() const noexcept { return state_.round >= config_.rounds; }

  /// Per-slot updates and losses of the most recent round (for callers that
  /// layer extra work on top, such as personalization).
  const Cohort& last_cohort() const noexcept { return last_cohort_; }
  const BroadcastPacket& last_broadcast() const noexcept { return last_packet_; }

 private:
  EngineConfig config_;
  FairnessConfig fairness_;
  std::vector<ObjectivePtr> objectives_;
  RoundState state_;
  WeightAudit audit_;
  Cohort last_cohort_;
  BroadcastPacket last_packet_;
};

/// Runs C rounds from theta0 and the initial group losses. With lambda = 0
/// this is FedAvg.
TrainingResult run_training(const EngineConfig& config, const FederationSpec& federation,
                            std::span<const ObjectivePtr> objectives, const ParamVector& theta0,
                            std::span<const double> initial_losses,
                            const TrainingHooks& hooks = {});

/// Continues a run from a saved state until config.rounds rounds are done.
TrainingResult resume_training(const EngineConfig& config, const FederationSpec& federation,
                               std::span<const ObjectivePtr> objectives, RoundState state,
                               const TrainingHooks& hooks = {});

/// Runs `task(i)` for i in [0, n) on up to `workers` threads. Exceptions are
/// rethrown on the caller, lowest index first.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& task);

}  // namespace gifair
