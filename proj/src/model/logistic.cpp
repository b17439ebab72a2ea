#include <cmath>
#include <stdexcept>
#include <utility>

#include "gifair/model/objective.hpp"

namespace gifair {

namespace {

// log(1 + e^z) without overflow.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

LogisticObjective::LogisticObjective(DatasetShard shard, double ridge)
    : Objective(ObjectiveKind::logistic, shard.feature_dim(), ridge), shard_(std::move(shard)) {
  shard_.validate();
  for (Eigen::Index i = 0; i < shard_.labels.size(); ++i) {
    const double y = shard_.labels(i);
    if (y != 0.0 && y != 1.0)
      throw std::invalid_argument("logistic objective needs binary labels in {0,1}");
  }
}

double LogisticObjective::sample_loss(const ParamVector& theta, std::size_t n) const {
  const auto i = static_cast<Eigen::Index>(n);
  const double z = shard_.features.row(i).dot(theta);
  return softplus(z) - shard_.labels(i) * z;
}

void LogisticObjective::add_sample_gradient(const ParamVector& theta, std::size_t n,
                                            ParamVector& acc) const {
  const auto i = static_cast<Eigen::Index>(n);
  const auto row = shard_.features.row(i);
  acc += (sigmoid(row.dot(theta)) - shard_.labels(i)) * row.transpose();
}

std::optional<double> LogisticObjective::accuracy(const ParamVector& theta) const {
  const Eigen::VectorXd z = shard_.features * theta;
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    if ((z(i) >= 0.0 ? 1.0 : 0.0) == shard_.labels(i)) ++correct;
  return static_cast<double>(correct) / static_cast<double>(z.size());
}

std::shared_ptr<const LogisticObjective> make_logistic(DatasetShard shard, double ridge) {
  return std::make_shared<LogisticObjective>(std::move(shard), ridge);
}

}  // namespace gifair
