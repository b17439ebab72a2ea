#include "gifair/harness/sweep.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace gifair {

SweepResult sweep_lambda(const ExperimentConfig& base, std::span<const double> grid,
                         std::size_t workers) {
  if (grid.empty()) throw std::invalid_argument("sweep: empty lambda grid");
  std::vector<double> fractions(grid.begin(), grid.end());
  for (double f : fractions)
    if (!(f >= 0.0) || !(f < 1.0))
      throw std::invalid_argument("sweep: grid values must lie in [0, 1), got " +
                                  format_real(f));
  std::sort(fractions.begin(), fractions.end());

  SweepResult out;
  out.rows.resize(fractions.size());
  parallel_for(fractions.size(), workers, [&](std::size_t i) {
    ExperimentConfig cfg = base;
    cfg.lambda.reset();
    cfg.lambda_fraction = fractions[i];
    if (fractions[i] > 0.0 && cfg.algorithm == "fedavg") cfg.algorithm = "gifair";
    const ExperimentResult r = run_experiment(cfg);
    out.rows[i] = {fractions[i], r.lambda, r.loss.train, r.loss.validation, r.loss.test};
  });
  out.best = select_best_lambda(out.rows);
  return out;
}

std::size_t select_best_lambda(std::span<const SweepRow> rows, double tolerance) {
  if (rows.empty()) throw std::invalid_argument("select_best_lambda: no rows");
  const auto ref = std::min_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.lambda < b.lambda;
  });
  const double mean_cap = ref->validation.mean * (1.0 + tolerance);
  std::size_t best = static_cast<std::size_t>(ref - rows.begin());
  double best_reduction = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].validation.mean > mean_cap) continue;
    const double reduction = ref->validation.variance - rows[i].validation.variance;
    if (reduction > best_reduction) {
      best_reduction = reduction;
      best = i;
    }
  }
  return best;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out =
      "fraction,lambda,train_mean_loss,train_loss_variance,train_discrepancy,"
      "validation_mean_loss,validation_loss_variance,validation_discrepancy,"
      "test_mean_loss,test_loss_variance,test_discrepancy\n";
  for (const auto& r : result.rows) {
    out += format_real(r.fraction) + ',' + format_real(r.lambda);
    for (const SpreadSummary* s : {&r.train, &r.validation, &r.test})
      out += ',' + format_real(s->mean) + ',' + format_real(s->variance) + ',' +
             format_real(s->discrepancy);
    out += '\n';
  }
  return out;
}

}  // namespace gifair
