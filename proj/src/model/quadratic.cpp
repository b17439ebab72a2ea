#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>

#include "gifair/model/objective.hpp"
#include "gifair/model/rng.hpp"

namespace gifair {

QuadraticObjective::QuadraticObjective(Eigen::MatrixXd hessian, ParamVector minimizer,
                                       double offset)
    : Objective(ObjectiveKind::quadratic, static_cast<std::size_t>(minimizer.size()), 0.0),
      hessian_(std::move(hessian)),
      minimizer_(std::move(minimizer)),
      offset_(offset) {
  if (hessian_.rows() != minimizer_.size() || hessian_.cols() != minimizer_.size())
    throw std::invalid_argument("quadratic: Hessian shape does not match the minimizer");
  if (!(offset_ >= 0.0)) throw std::invalid_argument("quadratic: offset must be nonnegative");
  fill_spectrum();
}

QuadraticObjective::QuadraticObjective(Eigen::MatrixXd hessian, ParamVector minimizer,
                                       double offset, double mu, double L)
    : QuadraticObjective(std::move(hessian), std::move(minimizer), offset) {
  if (!(mu > 0.0) || !(L >= mu)) throw std::invalid_argument("quadratic: need L >= mu > 0");
  exact_->mu = mu;
  exact_->L = L;
}

QuadraticObjective::QuadraticObjective(DatasetShard shard, double ridge)
    : Objective(ObjectiveKind::quadratic, shard.feature_dim() == 0 ? 0 : shard.feature_dim(),
                ridge) {
  shard.validate();
  const auto n = static_cast<double>(shard.size());
  const auto m = static_cast<Eigen::Index>(shard.feature_dim());
  hessian_ = shard.features.transpose() * shard.features / n;
  hessian_ += ridge * Eigen::MatrixXd::Identity(m, m);
  const Eigen::VectorXd b = shard.features.transpose() * shard.labels / n;
  Eigen::LLT<Eigen::MatrixXd> llt(hessian_);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument(
        "least squares: design is not positive definite (add ridge or samples)");
  minimizer_ = llt.solve(b);
  shard_ = std::move(shard);
  fill_spectrum();
  offset_ = std::max(0.0, value(minimizer_));
}

void QuadraticObjective::fill_spectrum() {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hessian_, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw std::runtime_error("quadratic: eigensolver failed");
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) throw std::invalid_argument("quadratic: Hessian must be positive definite");
  CurvatureConstants c;
  c.L = hi;
  c.mu = lo;
  exact_ = c;
}

std::size_t QuadraticObjective::num_samples() const noexcept {
  return shard_ ? shard_->size() : 1;
}

double QuadraticObjective::strong_convexity_floor() const noexcept { return exact_->mu; }

double QuadraticObjective::sample_loss(const ParamVector& theta, std::size_t n) const {
  if (shard_) {
    const double r = shard_->features.row(static_cast<Eigen::Index>(n)).dot(theta) -
                     shard_->labels(static_cast<Eigen::Index>(n));
    return 0.5 * r * r;
  }
  const ParamVector d = theta - minimizer_;
  return 0.5 * d.dot(hessian_ * d) + offset_;
}

void QuadraticObjective::add_sample_gradient(const ParamVector& theta, std::size_t n,
                                             ParamVector& acc) const {
  if (shard_) {
    const auto row = shard_->features.row(static_cast<Eigen::Index>(n));
    const double r = row.dot(theta) - shard_->labels(static_cast<Eigen::Index>(n));
    acc += r * row.transpose();
    return;
  }
  acc += hessian_ * (theta - minimizer_);
}

std::shared_ptr<const QuadraticObjective> make_quadratic(std::size_t dim,
                                                         double condition_number,
                                                         const ParamVector& optimum,
                                                         std::uint64_t rng_seed, double mu,
                                                         double offset) {
  if (dim == 0) throw std::invalid_argument("make_quadratic: dim must be >= 1");
  if (!(condition_number >= 1.0))
    throw std::invalid_argument("make_quadratic: condition_number must be >= 1");
  if (!(mu > 0.0)) throw std::invalid_argument("make_quadratic: mu must be positive");
  if (dim == 1 && condition_number != 1.0)
    throw std::invalid_argument("make_quadratic: a 1-D quadratic has condition number 1");
  if (static_cast<std::size_t>(optimum.size()) != dim)
    throw std::invalid_argument("make_quadratic: optimum has the wrong dimension");

  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::VectorXd spectrum(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double frac = d == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(d - 1);
    spectrum(i) = mu * std::pow(condition_number, frac);
  }
  spectrum(d - 1) = mu * condition_number;

  Rng rng = derive_stream(rng_seed, StreamTag::init);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = normal(rng);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  Eigen::MatrixXd a = q * spectrum.asDiagonal() * q.transpose();
  a = 0.5 * (a + a.transpose()).eval();

  return std::make_shared<QuadraticObjective>(std::move(a), optimum, offset, mu,
                                              mu * condition_number);
}

std::shared_ptr<const QuadraticObjective> make_least_squares(DatasetShard shard, double ridge) {
  return std::make_shared<QuadraticObjective>(std::move(shard), ridge);
}

}  // namespace gifair
