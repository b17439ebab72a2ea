#include "gifair/harness/suites.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gifair/data/partition.hpp"
#include "gifair/harness/gamma.hpp"

namespace gifair {

ConvergenceSuite strongly_convex_suite(std::uint64_t seed) {
  constexpr std::size_t kDim = 5;
  const std::vector<std::size_t> sizes{5, 5, 5, 5};
  const double offsets[] = {0.0, 5.0, 10.0, 15.0};
  ConvergenceSuite s{"strongly_convex",
                     FederationSpec::from_group_sizes(sizes, std::vector<std::size_t>(20, 1)),
                     {}, ParamVector::Zero(kDim), {}, SlopeField::objective_gap, 100, 10000};
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t k = 0; k < 20; ++k) {
    Rng rng = derive_stream(seed, StreamTag::data, k);
    ParamVector opt(kDim);
    for (auto& v : opt) v = 0.05 * normal(rng);
    s.objectives.push_back(make_quadratic(kDim, 4.0, opt, rng(), 1.0,
                                          offsets[s.federation.group_of(k)]));
  }
  s.engine.rounds = 5000;
  s.engine.local_steps = 2;
  s.engine.participation = 1.0;
  s.engine.sampling = SamplingMode::uniform;
  s.engine.batch_size = 1;
  s.engine.schedule = LrSchedule::inverse_t(4.0, 16.0, 2);
  s.engine.lambda = 0.5 * lambda_max(s.federation);
  s.engine.master_seed = seed;
  s.engine.gradient_noise_sd = 0.1;
  s.engine.metrics_every = 1;
  return s;
}

ConvergenceSuite nonconvex_suite(std::uint64_t seed) {
  constexpr std::size_t kDim = 3, kHidden = 8, kSamples = 40;
  // A light ridge term removes the flat directions of the hidden layer.
  constexpr double kRidge = 0.01;
  const std::vector<std::size_t> sizes{5, 5};
  std::vector<LinearGroupGenerator> gens;
  // The second group's larger label noise keeps its loss, and so the ranks,
  // clearly above the first group's.
  gens.push_back({Eigen::VectorXd::Constant(kDim, 0.5), 0.2, 0.0, 1.0});
  gens.push_back({Eigen::VectorXd::Constant(kDim, 0.3), 1.0, 0.0, 1.0});
  auto data = partition_group_shifted(10, sizes, gens, kSamples, seed);
  ConvergenceSuite s{"nonconvex", data.federation, {}, {}, {}, SlopeField::grad_norm_sq, 2000,
                     8000};
  const std::uint64_t init = derive_stream(seed, StreamTag::init)();
  for (auto& shard : data.shards) s.objectives.push_back(make_small_mlp(shard, kHidden, init, kRidge));
  s.theta0 = static_cast<const SmallMlpObjective&>(*s.objectives.front()).initial_parameters();
  s.engine.rounds = 4000;
  s.engine.local_steps = 2;
  s.engine.participation = 1.0;
  s.engine.sampling = SamplingMode::uniform;
  s.engine.batch_size = 10;
  s.engine.schedule = LrSchedule::inverse_sqrt(0.5, 1.0);
  s.engine.lambda = 0.3 * lambda_max(s.federation);
  s.engine.master_seed = seed;
  s.engine.metrics_every = 1;
  return s;
}

std::vector<std::string> suite_names() { return {"strongly_convex", "nonconvex"}; }

ConvergenceSuite make_suite(const std::string& name, std::uint64_t seed) {
  if (name == "strongly_convex") return strongly_convex_suite(seed);
  if (name == "nonconvex") return nonconvex_suite(seed);
  throw std::invalid_argument("unknown suite \"" + name +
                              "\" (expected strongly_convex or nonconvex)");
}

IdentityFuzzReport identity_fuzz(std::size_t trials, std::uint64_t seed, double tolerance) {
  IdentityFuzzReport report;
  report.trials = trials;
  constexpr std::size_t kDim = 3;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Rng rng = derive_stream(seed, StreamTag::probe, trial);
    std::uniform_int_distribution<std::size_t> pick_d(2, 6);
    const std::size_t d = pick_d(rng);
    std::uniform_int_distribution<std::size_t> pick_k(d, 60);
    const std::size_t K = pick_k(rng);
    // The first d clients seed every group; the rest land anywhere.
    std::vector<std::size_t> groups(K);
    std::uniform_int_distribution<std::size_t> pick_group(0, d - 1);
    for (std::size_t k = 0; k < K; ++k) groups[k] = k < d ? k : pick_group(rng);
    std::shuffle(groups.begin(), groups.end(), rng);
    std::uniform_int_distribution<std::size_t> pick_count(1, 100);
    std::vector<std::size_t> counts(K);
    for (auto& n : counts) n = pick_count(rng);
    auto fed = FederationSpec::create(groups, d, counts);

    // One in four trials gives every client the same objective (all groups tie).
    const bool all_same = rng() % 4 == 0;
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<ObjectivePtr> objectives;
    ObjectivePtr shared;
    for (std::size_t k = 0; k < K; ++k) {
      if (all_same && shared) {
        objectives.push_back(shared);
        continue;
      }
      ParamVector opt(kDim);
      for (auto& v : opt) v = normal(rng);
      auto obj = make_quadratic(kDim, 1.0 + 9.0 * unit(rng), opt, rng(), 0.1 + unit(rng),
                                5.0 * unit(rng));
      if (all_same) shared = obj;
      objectives.push_back(obj);
    }
    const double lam = unit(rng) * lambda_max(fed);
    const FairnessConfig config(lam, fed);
    ParamVector theta(kDim);
    for (auto& v : theta) v = 2.0 * normal(rng);

    const double direct = global_objective_direct(theta, objectives, config);
    const double weighted = global_objective_weighted(theta, objectives, config);
    const double err = std::abs(direct - weighted) / (1.0 + std::abs(direct));
    report.max_scaled_error = std::max(report.max_scaled_error, err);
    if (!(err <= tolerance)) ++report.failures;

    auto L = group_losses(client_losses(theta, objectives), fed);
    std::sort(L.begin(), L.end());
    if (std::adjacent_find(L.begin(), L.end()) != L.end()) ++report.trials_with_ties;
  }
  return report;
}

double min_grad_norm_sq_until(std::span<const MetricsRecord> trajectory, std::size_t t) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : trajectory)
    if (r.step <= t) best = std::min(best, r.grad_norm_sq);
  if (!std::isfinite(best)) throw std::invalid_argument("no metrics rows up to the given step");
  return best;
}

SuiteRun run_suite(const ConvergenceSuite& suite) {
  SuiteRun out;
  const auto initial = initial_group_losses(suite.theta0, suite.objectives, suite.federation);
  TrainingHooks hooks;
  const FairnessConfig fairness(suite.engine.lambda, suite.federation);
  if (all_quadratic(suite.objectives)) {
    const auto g = gamma_diagnostics(suite.objectives, fairness);
    out.h_star = g.h_star;
    hooks.gamma_k = g.gamma_k;
  }
  out.training = run_training(suite.engine, suite.federation, suite.objectives, suite.theta0,
                              initial, hooks);
  const auto& traj = out.training.trajectory;
  if (suite.field == SlopeField::objective_gap)
    out.slope = convergence_slope(traj, suite.field, suite.first_step, suite.last_step, out.h_star);
  else
    out.slope = convergence_slope(traj, suite.field, suite.first_step, suite.last_step);
  out.min_so_far_ratio = min_grad_norm_sq_until(traj, suite.last_step) /
                         min_grad_norm_sq_until(traj, suite.first_step);
  return out;
}

}  // namespace gifair
