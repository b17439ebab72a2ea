#include "gifair/model/objective.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace gifair {

std::string_view to_string(ObjectiveKind kind) noexcept {
  switch (kind) {
    case ObjectiveKind::quadratic:
      return "quadratic";
    case ObjectiveKind::logistic:
      return "logistic";
    case ObjectiveKind::small_mlp:
      return "small_mlp";
  }
  return "unknown";
}

void DatasetShard::validate() const {
  if (labels.size() < 1) throw std::invalid_argument("dataset shard must hold at least one sample");
  if (features.rows() != labels.size())
    throw std::invalid_argument("dataset shard: feature rows (" + std::to_string(features.rows()) +
                                ") and labels (" + std::to_string(labels.size()) +
                                ") are not aligned");
  if (!features.allFinite() || !labels.allFinite())
    throw std::invalid_argument("dataset shard contains non-finite values");
}

DatasetShard DatasetShard::subset(std::span<const std::size_t> rows) const {
  DatasetShard out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= size()) throw std::out_of_range("dataset shard row index out of range");
    const auto src = static_cast<Eigen::Index>(rows[i]);
    const auto dst = static_cast<Eigen::Index>(i);
    out.features.row(dst) = features.row(src);
    out.labels(dst) = labels(src);
  }
  return out;
}

Objective::Objective(ObjectiveKind kind, std::size_t dim, double ridge)
    : kind_(kind), dim_(dim), ridge_(ridge) {
  if (dim == 0) throw std::invalid_argument("objective dimension must be positive");
  if (!(ridge >= 0.0)) throw std::invalid_argument("ridge must be nonnegative");
}

void Objective::check_dim(const ParamVector& theta) const {
  if (static_cast<std::size_t>(theta.size()) != dim_)
    throw std::invalid_argument("parameter dimension " + std::to_string(theta.size()) +
                                " does not match objective dimension " + std::to_string(dim_));
}

double Objective::value(const ParamVector& theta) const {
  check_dim(theta);
  const std::size_t n = num_samples();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += sample_loss(theta, i);
  double v = sum / static_cast<double>(n);
  if (ridge_ > 0.0) v += 0.5 * ridge_ * theta.squaredNorm();
  return v;
}

ParamVector Objective::gradient(const ParamVector& theta) const {
  check_dim(theta);
  const std::size_t n = num_samples();
  ParamVector acc = ParamVector::Zero(theta.size());
  for (std::size_t i = 0; i < n; ++i) add_sample_gradient(theta, i, acc);
  acc /= static_cast<double>(n);
  if (ridge_ > 0.0) acc += ridge_ * theta;
  return acc;
}

ParamVector Objective::stochastic_gradient(const ParamVector& theta,
                                           std::span<const std::size_t> batch) const {
  check_dim(theta);
  if (batch.empty()) throw std::invalid_argument("stochastic gradient needs a nonempty batch");
  const std::size_t n = num_samples();
  std::vector<std::size_t> order(batch.begin(), batch.end());
  std::sort(order.begin(), order.end());
  if (order.back() >= n) throw std::out_of_range("batch index out of range");
  ParamVector acc = ParamVector::Zero(theta.size());
  for (std::size_t i : order) add_sample_gradient(theta, i, acc);
  acc /= static_cast<double>(order.size());
  if (ridge_ > 0.0) acc += ridge_ * theta;
  return acc;
}

}  // namespace gifair
