#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>

#include "gifair/model/objective.hpp"
#include "gifair/model/rng.hpp"

namespace gifair {

namespace {

using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMajorMutMap =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

}  // namespace

std::size_t SmallMlpObjective::parameter_count(std::size_t input_dim,
                                               std::size_t hidden_width) noexcept {
  return hidden_width * input_dim + 2 * hidden_width + 1;
}

SmallMlpObjective::SmallMlpObjective(DatasetShard shard, std::size_t hidden_width,
                                     std::uint64_t init_seed, double ridge)
    : Objective(ObjectiveKind::small_mlp,
                parameter_count(shard.feature_dim(), hidden_width == 0 ? 1 : hidden_width),
                ridge),
      shard_(std::move(shard)),
      hidden_(hidden_width),
      init_seed_(init_seed) {
  if (hidden_width == 0) throw std::invalid_argument("small MLP: hidden_width must be >= 1");
  if (shard_.feature_dim() == 0) throw std::invalid_argument("small MLP: shard has no features");
  shard_.validate();
}

double SmallMlpObjective::forward(const ParamVector& theta, std::size_t n,
                                  Eigen::VectorXd& hidden) const {
  const auto h = static_cast<Eigen::Index>(hidden_);
  const auto m = static_cast<Eigen::Index>(input_dim());
  const RowMajorMap w1(theta.data(), h, m);
  const auto b1 = theta.segment(h * m, h);
  const auto w2 = theta.segment(h * m + h, h);
  const double b2 = theta(h * m + 2 * h);
  hidden = (w1 * shard_.features.row(static_cast<Eigen::Index>(n)).transpose() + b1)
               .array()
               .tanh()
               .matrix();
  return w2.dot(hidden) + b2;
}

double SmallMlpObjective::sample_loss(const ParamVector& theta, std::size_t n) const {
  Eigen::VectorXd hidden;
  const double r = forward(theta, n, hidden) - shard_.labels(static_cast<Eigen::Index>(n));
  return r * r;
}

void SmallMlpObjective::add_sample_gradient(const ParamVector& theta, std::size_t n,
                                            ParamVector& acc) const {
  const auto h = static_cast<Eigen::Index>(hidden_);
  const auto m = static_cast<Eigen::Index>(input_dim());
  Eigen::VectorXd a;
  const double r =
      2.0 * (forward(theta, n, a) - shard_.labels(static_cast<Eigen::Index>(n)));
  const auto w2 = theta.segment(h * m + h, h);
  // d tanh(z)/dz = 1 - tanh(z)^2
  const Eigen::VectorXd delta = r * (w2.array() * (1.0 - a.array().square())).matrix();
  RowMajorMutMap gw1(acc.data(), h, m);
  gw1.noalias() += delta * shard_.features.row(static_cast<Eigen::Index>(n));
  acc.segment(h * m, h) += delta;
  acc.segment(h * m + h, h) += r * a;
  acc(h * m + 2 * h) += r;
}

ParamVector SmallMlpObjective::initial_parameters() const {
  const auto h = static_cast<Eigen::Index>(hidden_);
  const auto m = static_cast<Eigen::Index>(input_dim());
  Rng rng = derive_stream(init_seed_, StreamTag::init);
  std::normal_distribution<double> in_scale(0.0, 1.0 / std::sqrt(static_cast<double>(m)));
  std::normal_distribution<double> out_scale(0.0, 1.0 / std::sqrt(static_cast<double>(h)));
  ParamVector theta = ParamVector::Zero(static_cast<Eigen::Index>(dim()));
  for (Eigen::Index i = 0; i < h * m; ++i) theta(i) = in_scale(rng);
  for (Eigen::Index i = 0; i < h; ++i) theta(h * m + h + i) = out_scale(rng);
  return theta;
}

std::shared_ptr<const SmallMlpObjective> make_small_mlp(DatasetShard shard,
                                                        std::size_t hidden_width,
                                                        std::uint64_t rng_seed, double ridge) {
  return std::make_shared<SmallMlpObjective>(std::move(shard), hidden_width, rng_seed, ridge);
}

}  // namespace gifair
