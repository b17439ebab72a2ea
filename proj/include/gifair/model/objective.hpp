#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>

#include "gifair/model/dataset.hpp"
#include "gifair/model/param.hpp"

namespace gifair {

enum class ObjectiveKind { quadratic, logistic, small_mlp };

std::string_view to_string(ObjectiveKind kind) noexcept;

/// Smoothness / strong convexity / gradient-noise constants of one client
/// objective. `lower_bound` is set when L was estimated from samples rather
/// than read off an exact spectrum; sigma_sq and G_sq are always sampled.
struct CurvatureConstants {
  double L = 0.0;
  double mu = 0.0;
  double sigma_sq = 0.0;
  double G_sq = 0.0;
  bool lower_bound = false;
};

/// A client's local empirical risk
///
///   F(theta) = (1/N) sum_n loss_n(theta) + (ridge/2) ||theta||^2
///
/// Objectives are immutable after construction and safe to evaluate from
/// concurrent threads. Per-sample terms are always reduced in ascending index
/// order, so a full-batch stochastic gradient equals gradient() bitwise.
class Objective {
 public:
  virtual ~Objective() = default;

  ObjectiveKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  double regularizer() const noexcept { return ridge_; }
  virtual std::size_t num_samples() const noexcept = 0;

  double value(const ParamVector& theta) const;
  ParamVector gradient(const ParamVector& theta) const;

  /// Mean of per-sample gradients over `batch` plus the ridge term. Indices
  /// are reduced in ascending order; duplicates count with multiplicity.
  ParamVector stochastic_gradient(const ParamVector& theta,
                                  std::span<const std::size_t> batch) const;

  /// Fraction of correctly classified samples, for classifiers only.
  virtual std::optional<double> accuracy(const ParamVector& /*theta*/) const {
    return std::nullopt;
  }

  /// Known floor on the strong-convexity constant (0 if none).
  virtual double strong_convexity_floor() const noexcept { return ridge_; }

  /// Constants known in closed form, if any.
  const std::optional<CurvatureConstants>& exact_constants() const noexcept {
    return exact_;
  }

 protected:
  Objective(ObjectiveKind kind, std::size_t dim, double ridge);

  virtual double sample_loss(const ParamVector& theta, std::size_t n) const = 0;
  virtual void add_sample_gradient(const ParamVector& theta, std::size_t n,
                                   ParamVector& acc) const = 0;

  std::optional<CurvatureConstants> exact_;

 private:
  void check_dim(const ParamVector& theta) const;

  ObjectiveKind kind_;
  std::size_t dim_;
  double ridge_;
};

using ObjectivePtr = std::shared_ptr<const Objective>;

/// F(theta) = 1/2 (theta - theta*)^T A (theta - theta*) + c.
///
/// Built either from an explicit spectrum (make_quadratic, one virtual sample)
/// or from a regression shard with loss 1/2 (x^T theta - y)^2
/// (make_least_squares). Both expose A, theta* and c.
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(Eigen::MatrixXd hessian, ParamVector minimizer, double offset);
  /// Takes (mu, L) as the known spectrum bounds instead of recomputing them.
  QuadraticObjective(Eigen::MatrixXd hessian, ParamVector minimizer, double offset, double mu,
                     double L);
  QuadraticObjective(DatasetShard shard, double ridge);

  std::size_t num_samples() const noexcept override;
  double strong_convexity_floor() const noexcept override;

  const Eigen::MatrixXd& hessian() const noexcept { return hessian_; }
  const ParamVector& minimizer() const noexcept { return minimizer_; }
  double min_value() const noexcept { return offset_; }
  bool has_shard() const noexcept { return shard_.has_value(); }

 protected:
  double sample_loss(const ParamVector& theta, std::size_t n) const override;
  void add_sample_gradient(const ParamVector& theta, std::size_t n,
                           ParamVector& acc) const override;

 private:
  void fill_spectrum();

  Eigen::MatrixXd hessian_;
  ParamVector minimizer_;
  double offset_ = 0.0;
  std::optional<DatasetShard> shard_;
};

/// Mean binary cross-entropy with labels in {0,1}, no intercept (append a
/// constant feature for one).
class LogisticObjective final : public Objective {
 public:
  LogisticObjective(DatasetShard shard, double ridge);

  std::size_t num_samples() const noexcept override { return shard_.size(); }
  std::optional<double> accuracy(const ParamVector& theta) const override;

 protected:
  double sample_loss(const ParamVector& theta, std::size_t n) const override;
  void add_sample_gradient(const ParamVector& theta, std::size_t n,
                           ParamVector& acc) const override;

 private:
  DatasetShard shard_;
};

/// Scalar-output regression network with one hidden layer:
///
///   h(x) = w2 . tanh(W1 x + b1) + b2,   loss = (h(x) - y)^2
///
/// tanh is C-infinity, so the loss is L-smooth on bounded sets. Parameter
/// layout: W1 (hidden x input, row-major), b1, w2, b2.
class SmallMlpObjective final : public Objective {
 public:
  SmallMlpObjective(DatasetShard shard, std::size_t hidden_width, std::uint64_t init_seed,
                    double ridge = 0.0);

  std::size_t num_samples() const noexcept override { return shard_.size(); }
  double strong_convexity_floor() const noexcept override { return 0.0; }

  std::size_t hidden_width() const noexcept { return hidden_; }
  std::size_t input_dim() const noexcept { return shard_.feature_dim(); }

  /// Small random weights drawn from the construction seed, zero biases.
  ParamVector initial_parameters() const;

  static std::size_t parameter_count(std::size_t input_dim, std::size_t hidden_width) noexcept;

 protected:
  double sample_loss(const ParamVector& theta, std::size_t n) const override;
  void add_sample_gradient(const ParamVector& theta, std::size_t n,
                           ParamVector& acc) const override;

 private:
  double forward(const ParamVector& theta, std::size_t n, Eigen::VectorXd& hidden) const;

  DatasetShard shard_;
  std::size_t hidden_;
  std::uint64_t init_seed_;
};

/// Random SPD quadratic with eigenvalues log-spaced over [mu, mu * condition_number]
/// (endpoints exact), minimizer `optimum` and minimum value `offset` >= 0.
/// Throws std::invalid_argument for dim 0, condition_number < 1, mu <= 0,
/// offset < 0, a mismatched optimum, or dim 1 with condition_number != 1.
std::shared_ptr<const QuadraticObjective> make_quadratic(std::size_t dim,
                                                         double condition_number,
                                                         const ParamVector& optimum,
                                                         std::uint64_t rng_seed,
                                                         double mu = 1.0, double offset = 0.0);

/// Least-squares regression objective; requires a positive definite design
/// (full column rank or ridge > 0).
std::shared_ptr<const QuadraticObjective> make_least_squares(DatasetShard shard, double ridge);

/// Rejects labels outside {0,1}.
std::shared_ptr<const LogisticObjective> make_logistic(DatasetShard shard, double ridge);

std::shared_ptr<const SmallMlpObjective> make_small_mlp(DatasetShard shard,
                                                        std::size_t hidden_width,
                                                        std::uint64_t rng_seed,
                                                        double ridge = 0.0);

}  // namespace gifair
