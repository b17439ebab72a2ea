#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gifair/harness/experiment.hpp"

namespace gifair {

struct SweepRow {
  double fraction = 0.0;
  double lambda = 0.0;
  SpreadSummary train;
  SpreadSummary validation;
  SpreadSummary test;
};

struct SweepResult {
  /// Sorted by lambda.
  std::vector<SweepRow> rows;
  /// Index of the selected row (see select_best_lambda).
  std::size_t best = 0;
};

/// One full run per grid value (a fraction of lambda_max in [0, 1)) on the
/// same seeds. Runs are independent and may use up to `workers` threads.
SweepResult sweep_lambda(const ExperimentConfig& base, std::span<const double> grid,
                         std::size_t workers = 1);

/// Largest reduction of the validation loss variance relative to the
/// smallest-lambda row, among rows whose validation mean loss is at most
/// (1 + tolerance) times that row's mean.
std::size_t select_best_lambda(std::span<const SweepRow> rows, double tolerance = 0.01);

/// Header "fraction,lambda,train_mean_loss,...,test_discrepancy" and one row
/// per grid value.
std::string sweep_csv(const SweepResult& result);

}  // namespace gifair
