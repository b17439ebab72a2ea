#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gifair/ditto/ditto.hpp"
#include "gifair/engine/engine.hpp"
#include "gifair/harness/metrics.hpp"

namespace gifair {

/// Everything one run needs, read from a flat JSON document (see
/// docs/formats.md for the key list and defaults).
struct ExperimentConfig {
  std::string scenario = "experiment";
  std::uint64_t seed = 1;

  // Federation and data.
  std::string data_scheme = "group_shifted";  // group_shifted | iid | label_skew | quadratic
  std::vector<std::size_t> group_sizes{5, 5};
  std::size_t samples_per_client = 50;
  std::size_t feature_dim = 3;
  double group_shift = 1.0;
  double noise_sd = 0.5;
  std::size_t num_classes = 4;
  std::size_t classes_per_client = 2;
  double class_separation = 2.0;
  double condition_number = 4.0;
  double client_jitter = 0.1;
  double train_fraction = 0.7;
  double validation_fraction = 0.1;

  // Objective.
  std::string objective = "least_squares";  // least_squares | logistic | small_mlp | quadratic
  std::size_t hidden_width = 8;
  double ridge = 0.0;

  // Training.
  std::string algorithm = "gifair";  // gifair | fedavg | ditto
  std::size_t rounds = 100;
  std::size_t local_steps = 5;
  double participation = 1.0;
  std::size_t batch_size = 10;
  std::string sampling = "by_probability";  // by_probability | uniform
  std::string lr_schedule = "inverse_t";    // inverse_t | inverse_sqrt | constant
  double lr_beta = 1.0;
  double lr_gamma = 10.0;
  /// Exactly one of lambda / lambda_fraction may be set; neither means 0.
  std::optional<double> lambda;
  std::optional<double> lambda_fraction;
  double gradient_noise = 0.0;
  std::string refresh_loss = "local_iterate";  // local_iterate | aggregate
  std::size_t metrics_every = 1;
  std::size_t num_workers = 1;

  // Ditto second level.
  double ditto_lambda = 1.0;
  std::size_t ditto_steps = 5;
  std::string ditto_lr_schedule = "constant";
  double ditto_lr_beta = 0.05;
  double ditto_lr_gamma = 10.0;

  std::string output_dir = "out";
};

/// Parses JSON text. Unknown keys, wrong types and out-of-range values throw
/// std::invalid_argument. A document with a top-level "config" object (a run
/// manifest) is read through that object.
ExperimentConfig parse_config(const std::string& json_text);

/// Reads a config or manifest file. Throws IoError if it cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

/// The resolved config as pretty-printed JSON (every key present).
std::string config_to_json(const ExperimentConfig& config);

/// Federation, objectives and initial point built from a config.
struct Scenario {
  FederationSpec federation;
  std::vector<ObjectivePtr> train;
  std::vector<ObjectivePtr> validation;
  std::vector<ObjectivePtr> test;
  ParamVector theta0;
  double lambda = 0.0;
  double lambda_max = 0.0;
};

/// Validates lambda against lambda_max before generating any data.
Scenario build_scenario(const ExperimentConfig& config);

EngineConfig make_engine_config(const ExperimentConfig& config, double lambda);

/// Spread of one per-client metric on each data split.
struct SplitSpread {
  SpreadSummary train;
  SpreadSummary validation;
  SpreadSummary test;
};

struct ExperimentResult {
  ParamVector theta;
  std::vector<MetricsRecord> trajectory;
  double lambda = 0.0;
  double lambda_max = 0.0;
  SplitSpread loss;
  std::optional<SplitSpread> accuracy;
  /// Per-client losses at the final model, by split.
  std::vector<double> train_losses, validation_losses, test_losses;
  std::optional<std::vector<double>> test_accuracy;
  /// Ditto runs: spread of personal-model losses.
  std::optional<SplitSpread> personal_loss;
  WeightAudit audit;
  std::optional<double> gamma_k;
  /// Group index and weight p_k of every client.
  std::vector<std::size_t> groups;
  std::vector<double> weights;
};

/// Runs the configured algorithm without touching the file system.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Runs and writes metrics.csv, clients.csv, summary.json and manifest.json
/// into config.output_dir. Throws IoError on write failures.
ExperimentResult run_experiment_to_disk(const ExperimentConfig& config);

/// Fixed metrics CSV header.
inline constexpr const char* kMetricsHeader =
    "round,step,mean_loss,loss_variance,discrepancy,objective_value,grad_norm_sq,gamma_k";

/// Header plus one row per record, reals with 17 significant digits.
std::string metrics_csv(const std::vector<MetricsRecord>& trajectory);

/// "%.17g" formatting ("nan" for NaN).
std::string format_real(double value);

}  // namespace gifair
