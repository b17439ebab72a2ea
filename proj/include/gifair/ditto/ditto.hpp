#pragma once

#include <cstddef>
#include <vector>

#include "gifair/engine/engine.hpp"

namespace gifair {

/// Second-level (personalization) settings. The first level reuses the
/// engine's local_steps and schedule as E1 and eta1.
struct DittoConfig {
  double lambda_ditto = 1.0;
  /// Personalization steps per round; 0 switches personalization off.
  std::size_t personal_steps = 1;
  LrSchedule schedule2 = LrSchedule::constant(0.01);

  void validate() const;
};

/// v_k for every client.
using PersonalStates = std::vector<ParamVector>;

/// E2 steps of v <- v - eta2(t0 + s) (g(v) + lambda_ditto (v - anchor)) where g
/// is a minibatch gradient of `objective`. Ranks play no part here.
ParamVector personal_update(const ParamVector& v_start, const Objective& objective,
                            const ParamVector& theta_anchor, double lambda_ditto,
                            std::size_t personal_steps, const LrSchedule& schedule2,
                            std::size_t t0, std::size_t batch_size, Rng& rng,
                            double gradient_noise_sd = 0.0, std::size_t round = 0,
                            std::size_t client = 0);

/// argmin_v F_k(v) + (lambda_ditto / 2) ||v - anchor||^2 for a quadratic F_k:
/// (A + lambda I)^{-1} (A theta*_k + lambda anchor).
ParamVector proximal_optimum(const QuadraticObjective& objective, const ParamVector& anchor,
                             double lambda_ditto);

struct DittoResult {
  ParamVector theta;
  PersonalStates personal;
  RoundState final_state;
  std::vector<MetricsRecord> trajectory;
  WeightAudit audit;
};

/// Each round: the GIFAIR first level (E1 weighted steps, aggregation, rank
/// refresh from the E1 iterates), then E2 personal steps for every distinct
/// sampled client, anchored at that round's broadcast model. Unsampled
/// clients keep their personal model.
DittoResult run_ditto_training(const EngineConfig& engine_config, const DittoConfig& ditto_config,
                               const FederationSpec& federation,
                               std::span<const ObjectivePtr> objectives, const ParamVector& theta0,
                               PersonalStates v0, std::span<const double> initial_losses,
                               const TrainingHooks& hooks = {});

}  // namespace gifair
