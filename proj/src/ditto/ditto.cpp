#include "gifair/ditto/ditto.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gifair/errors.hpp"

namespace gifair {

void DittoConfig::validate() const {
  if (!(lambda_ditto > 0.0) || !std::isfinite(lambda_ditto))
    throw std::invalid_argument("lambda_ditto must be positive and finite");
}

ParamVector personal_update(const ParamVector& v_start, const Objective& objective,
                            const ParamVector& theta_anchor, double lambda_ditto,
                            std::size_t personal_steps, const LrSchedule& schedule2,
                            std::size_t t0, std::size_t batch_size, Rng& rng,
                            double gradient_noise_sd, std::size_t round, std::size_t client) {
  if (!(lambda_ditto > 0.0)) throw std::invalid_argument("personal_update: lambda_ditto must be > 0");
  if (batch_size == 0) throw std::invalid_argument("personal_update: batch_size must be >= 1");
  if (v_start.size() != theta_anchor.size())
    throw std::invalid_argument("personal_update: anchor dimension mismatch");
  ParamVector v = v_start;
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t s = 0; s < personal_steps; ++s) {
    const auto batch = draw_batch(rng, objective.num_samples(), batch_size);
    ParamVector g = objective.stochastic_gradient(v, batch);
    if (gradient_noise_sd > 0.0)
      for (Eigen::Index i = 0; i < g.size(); ++i) g[i] += gradient_noise_sd * noise(rng);
    g += lambda_ditto * (v - theta_anchor);
    v -= schedule2.rate(t0 + s) * g;
    if (!all_finite(v) || v.norm() > kDivergenceNorm)
      throw DivergenceError("personal model diverged (round " + std::to_string(round) +
                                ", client " + std::to_string(client) + ")",
                            round, t0 + s + 1, client);
  }
  return v;
}

ParamVector proximal_optimum(const QuadraticObjective& objective, const ParamVector& anchor,
                             double lambda_ditto) {
  const auto& A = objective.hessian();
  Eigen::MatrixXd M = A;
  M.diagonal().array() += lambda_ditto;
  const ParamVector rhs = A * objective.minimizer() + lambda_ditto * anchor;
  return M.llt().solve(rhs);
}

DittoResult run_ditto_training(const EngineConfig& engine_config, const DittoConfig& ditto_config,
                               const FederationSpec& federation,
                               std::span<const ObjectivePtr> objectives, const ParamVector& theta0,
                               PersonalStates v0, std::span<const double> initial_losses,
                               const TrainingHooks& hooks) {
  ditto_config.validate();
  if (v0.size() != federation.num_clients())
    throw std::invalid_argument("expected one personal model per client");
  for (const auto& v : v0)
    if (v.size() != theta0.size())
      throw std::invalid_argument("personal model dimension does not match theta0");

  GifairEngine engine(engine_config, federation,
                      std::vector<ObjectivePtr>(objectives.begin(), objectives.end()),
                      make_initial_state(theta0, initial_losses, federation));
  std::optional<MetricsEvaluator> metrics;
  if (engine_config.metrics_every > 0)
    metrics.emplace(std::vector<ObjectivePtr>(objectives.begin(), objectives.end()),
                    engine.fairness());
  const double gamma = hooks.gamma_k.value_or(std::numeric_limits<double>::quiet_NaN());

  DittoResult out;
  out.personal = std::move(v0);
  while (!engine.finished()) {
    const std::size_t c = engine.state().round;
    engine.run_round();
    if (ditto_config.personal_steps > 0) {
      // The first level's stored cohort and broadcast give S_c and the anchor.
      std::vector<std::size_t> distinct;
      std::vector<bool> seen(federation.num_clients(), false);
      for (std::size_t k : engine.last_cohort().clients)
        if (!seen[k]) {
          seen[k] = true;
          distinct.push_back(k);
        }
      const ParamVector& anchor = engine.last_broadcast().theta;
      parallel_for(distinct.size(), engine_config.num_workers, [&](std::size_t i) {
        const std::size_t k = distinct[i];
        Rng rng = derive_stream(engine_config.master_seed, StreamTag::personalization, c, k);
        out.personal[k] = personal_update(
            out.personal[k], *objectives[k], anchor, ditto_config.lambda_ditto,
            ditto_config.personal_steps, ditto_config.schedule2, c * ditto_config.personal_steps,
            engine_config.batch_size, rng, engine_config.gradient_noise_sd, c, k);
      });
    }
    const auto& s = engine.state();
    if (metrics && (s.round % engine_config.metrics_every == 0 || s.round == engine_config.rounds))
      out.trajectory.push_back(metrics->evaluate(s.theta_bar, s.round, s.global_step, gamma));
    if (hooks.on_round) hooks.on_round(s);
  }
  out.theta = engine.state().theta_bar;
  out.final_state = engine.state();
  out.audit = engine.audit();
  return out;
}

}  // namespace gifair
