#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gifair/engine/engine.hpp"
#include "gifair/harness/convergence.hpp"

namespace gifair {

/// A self-contained convergence benchmark: federation, objectives, start
/// point, engine settings and the step window the rate is read over.
struct ConvergenceSuite {
  std::string name;
  FederationSpec federation;
  std::vector<ObjectivePtr> objectives;
  ParamVector theta0;
  EngineConfig engine;
  SlopeField field = SlopeField::objective_gap;
  std::size_t first_step = 0;
  std::size_t last_step = 0;
};

/// 20 strongly convex quadratics in four groups with well separated
/// minimum values (so ranks never change near the optimum), full
/// participation, inverse-t step sizes and Gaussian gradient noise of
/// standard deviation 0.1. Rate window: steps [100, 10000].
ConvergenceSuite strongly_convex_suite(std::uint64_t seed);

/// Ten one-hidden-layer tanh regressors (ridge 0.01) in two groups whose
/// label noise differs, inverse-sqrt step sizes, minibatches of 10 as the
/// only noise. Window: steps [2000, 8000].
ConvergenceSuite nonconvex_suite(std::uint64_t seed);

/// Names accepted by make_suite.
std::vector<std::string> suite_names();

/// Throws std::invalid_argument for an unknown name.
ConvergenceSuite make_suite(const std::string& name, std::uint64_t seed);

struct SuiteRun {
  TrainingResult training;
  /// Exact H* (quadratic suites) or NaN.
  double h_star = std::numeric_limits<double>::quiet_NaN();
  /// Log-log slope of the suite's field over its window.
  double slope = std::numeric_limits<double>::quiet_NaN();
  /// Smallest grad_norm_sq seen up to last_step over the smallest seen up
  /// to first_step.
  double min_so_far_ratio = std::numeric_limits<double>::quiet_NaN();
};

SuiteRun run_suite(const ConvergenceSuite& suite);

/// Randomized check that the direct and rank-weighted forms of H agree.
struct IdentityFuzzReport {
  std::size_t trials = 0;
  std::size_t failures = 0;
  /// max |direct - weighted| / (1 + |direct|).
  double max_scaled_error = 0.0;
  /// Trials in which at least two group losses tied exactly.
  std::size_t trials_with_ties = 0;
};

/// Each trial draws d in [2, 6], K in [d, 60], a random group assignment with
/// every group non-empty, random sample counts, random quadratic client
/// objectives (some groups sharing identical objectives so ties occur),
/// lambda uniform in [0, lambda_max) and a random theta. A trial fails when
/// the scaled error exceeds `tolerance`.
IdentityFuzzReport identity_fuzz(std::size_t trials, std::uint64_t seed, double tolerance = 1e-10);

/// min over rows with step <= t of grad_norm_sq. Throws if no row qualifies.
double min_grad_norm_sq_until(std::span<const MetricsRecord> trajectory, std::size_t t);

}  // namespace gifair
