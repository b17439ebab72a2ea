#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/Eigenvalues>

#include "gifair/model/curvature.hpp"
#include "gifair/model/objective.hpp"
#include "gifair/model/rng.hpp"
#include "test_util.hpp"

using namespace gifair;
using gifair::testing::finite_difference;
using gifair::testing::random_shard;
using gifair::testing::random_vector;

namespace {

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

DatasetShard binary_shard(std::size_t n, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_shard(n, m, rng, [](std::size_t r, auto&) { return static_cast<double>(r % 2); });
}

DatasetShard regression_shard(std::size_t n, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  return random_shard(n, m, rng, [&z](std::size_t, auto& g) { return z(g); });
}

std::vector<ObjectivePtr> one_of_each(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return {make_quadratic(4, 10.0, random_vector(4, rng), seed, 0.5, 2.0),
          make_least_squares(regression_shard(30, 3, seed + 1), 0.0),
          make_logistic(binary_shard(40, 3, seed + 2), 0.1),
          make_small_mlp(regression_shard(25, 2, seed + 3), 4, seed + 4)};
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("1-D identity quadratic") {
  auto q = make_quadratic(1, 1.0, ParamVector::Zero(1), 3);
  ParamVector t(1);
  t << 2.5;
  CHECK(q->value(t) == doctest::Approx(0.5 * 2.5 * 2.5).epsilon(1e-14));
  CHECK(q->min_value() == 0.0);
  CHECK(q->minimizer()[0] == 0.0);
  CHECK(q->value(ParamVector::Zero(1)) == 0.0);
}

TEST_CASE("quadratic spectrum spans the requested condition number") {
  std::mt19937_64 rng(5);
  auto q = make_quadratic(3, 10.0, random_vector(3, rng), 11);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q->hessian());
  const auto ev = eig.eigenvalues();
  CHECK(std::abs(ev.maxCoeff() / ev.minCoeff() - 10.0) <= 1e-12 * 10.0);
  CHECK((q->hessian() - q->hessian().transpose()).norm() == 0.0);
}

TEST_CASE("quadratic is stationary at its optimum with value c") {
  std::mt19937_64 rng(6);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const ParamVector opt = random_vector(5, rng);
    auto q = make_quadratic(5, 3.0, opt, s, 2.0, 1.25);
    CHECK(q->value(opt) == doctest::Approx(1.25).epsilon(1e-14));
    CHECK(q->gradient(opt).norm() <= 1e-12);
  }
}

TEST_CASE("quadratic ground truth at random points") {
  std::mt19937_64 rng(7);
  const ParamVector opt = random_vector(6, rng);
  auto q = make_quadratic(6, 25.0, opt, 9, 0.3, 4.0);
  for (int i = 0; i < 20; ++i) {
    const ParamVector t = random_vector(6, rng, 3.0);
    const ParamVector d = t - opt;
    const double expect = 0.5 * d.dot(q->hessian() * d);
    CHECK(std::abs((q->value(t) - 4.0) - expect) <= 1e-12 * std::max(1.0, expect));
  }
}

TEST_CASE("least squares matches a hand-rolled mean of half squared residuals") {
  const auto shard = regression_shard(17, 3, 21);
  auto ls = make_least_squares(shard, 0.0);
  std::mt19937_64 rng(22);
  const ParamVector t = random_vector(3, rng);
  double sum = 0.0;
  for (Eigen::Index r = 0; r < shard.features.rows(); ++r) {
    const double res = shard.features.row(r).dot(t) - shard.labels[r];
    sum += 0.5 * res * res;
  }
  CHECK(ls->value(t) == doctest::Approx(sum / 17.0).epsilon(1e-12));
  CHECK(ls->gradient(ls->minimizer()).norm() <= 1e-10);
}

TEST_CASE("make_quadratic rejects bad arguments") {
  CHECK_THROWS_AS(make_quadratic(0, 1.0, ParamVector::Zero(0), 1), std::invalid_argument);
  CHECK_THROWS_AS(make_quadratic(3, 0.5, ParamVector::Zero(3), 1), std::invalid_argument);
  CHECK_THROWS_AS(make_quadratic(3, 2.0, ParamVector::Zero(2), 1), std::invalid_argument);
  CHECK_THROWS_AS(make_quadratic(1, 2.0, ParamVector::Zero(1), 1), std::invalid_argument);
  CHECK_THROWS_AS(make_quadratic(2, 2.0, ParamVector::Zero(2), 1, -1.0), std::invalid_argument);
}

TEST_CASE("logistic at zero with balanced labels is ln 2") {
  auto lg = make_logistic(binary_shard(20, 4, 1), 0.0);
  CHECK(lg->value(ParamVector::Zero(4)) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("logistic ridge sets the strong convexity floor") {
  auto lg = make_logistic(binary_shard(20, 3, 2), 0.25);
  CHECK(lg->strong_convexity_floor() == 0.25);
  const auto c = estimate_constants(*lg, 1.0, 8, 3);
  CHECK(c.mu >= 0.25);
  CHECK(c.lower_bound);
  CHECK(c.L >= c.mu);
}

TEST_CASE("logistic gradient matches finite differences") {
  auto lg = make_logistic(binary_shard(30, 3, 4), 0.05);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 10; ++i) {
    const ParamVector t = random_vector(3, rng);
    const ParamVector g = lg->gradient(t);
    CHECK((g - finite_difference(*lg, t)).norm() <= 1e-6 * std::max(1.0, g.norm()));
  }
}

TEST_CASE("logistic rejects non-binary labels") {
  auto s = binary_shard(6, 2, 1);
  s.labels[3] = 2.0;
  CHECK_THROWS_AS(make_logistic(s, 0.0), std::invalid_argument);
  s.labels[3] = 0.5;
  CHECK_THROWS_AS(make_logistic(s, 0.0), std::invalid_argument);
}

TEST_CASE("logistic accuracy is a fraction") {
  auto lg = make_logistic(binary_shard(10, 2, 3), 0.0);
  const auto acc = lg->accuracy(ParamVector::Zero(2));
  REQUIRE(acc.has_value());
  CHECK(*acc >= 0.0);
  CHECK(*acc <= 1.0);
  CHECK_FALSE(make_quadratic(2, 1.0, ParamVector::Zero(2), 1)->accuracy(ParamVector::Zero(2)));
}

TEST_CASE("MLP with zero weights outputs zero") {
  const auto shard = regression_shard(12, 3, 5);
  auto mlp = make_small_mlp(shard, 4, 1);
  CHECK(mlp->dim() == SmallMlpObjective::parameter_count(3, 4));
  CHECK(mlp->dim() == 4 * 3 + 4 + 4 + 1);
  const double msq = shard.labels.squaredNorm() / 12.0;
  CHECK(mlp->value(ParamVector::Zero(static_cast<Eigen::Index>(mlp->dim()))) ==
        doctest::Approx(msq).epsilon(1e-14));
}

TEST_CASE("MLP gradient matches finite differences at random points") {
  auto mlp = make_small_mlp(regression_shard(15, 3, 6), 5, 2, 0.01);
  std::mt19937_64 rng(9);
  for (int i = 0; i < 10; ++i) {
    const ParamVector t = random_vector(mlp->dim(), rng, 0.7);
    const ParamVector g = mlp->gradient(t);
    CHECK((g - finite_difference(*mlp, t)).norm() <= 1e-5 * std::max(1.0, g.norm()));
  }
}

TEST_CASE("MLP value is invariant under hidden-unit permutation") {
  const std::size_t m = 3, H = 4;
  auto mlp = make_small_mlp(regression_shard(10, m, 7), H, 3);
  std::mt19937_64 rng(10);
  const ParamVector t = random_vector(mlp->dim(), rng);
  // swap hidden units 0 and 2: rows of W1, entries of b1 and w2
  ParamVector p = t;
  for (std::size_t c = 0; c < m; ++c) std::swap(p[0 * m + c], p[2 * m + c]);
  std::swap(p[H * m + 0], p[H * m + 2]);
  std::swap(p[H * m + H + 0], p[H * m + H + 2]);
  CHECK(mlp->value(p) == doctest::Approx(mlp->value(t)).epsilon(1e-14));
}

TEST_CASE("MLP initial parameters are deterministic with zero biases") {
  auto a = make_small_mlp(regression_shard(10, 2, 1), 3, 42);
  auto b = make_small_mlp(regression_shard(10, 2, 1), 3, 42);
  const ParamVector p = a->initial_parameters();
  CHECK(p == b->initial_parameters());
  CHECK(p.segment(6, 3).isZero());  // b1
  CHECK(p(12) == 0.0);              // b2
  CHECK(p.head(6).norm() > 0.0);
  CHECK(p.segment(9, 3).norm() > 0.0);
  CHECK(p != make_small_mlp(regression_shard(10, 2, 1), 3, 43)->initial_parameters());
  CHECK_THROWS_AS(make_small_mlp(regression_shard(10, 2, 1), 0, 1), std::invalid_argument);
}

TEST_CASE("finite differences agree for every objective kind at 20 points") {
  const auto objs = one_of_each(31);
  std::mt19937_64 rng(32);
  for (const auto& o : objs) {
    for (int i = 0; i < 20; ++i) {
      const ParamVector t = random_vector(o->dim(), rng, 0.8);
      const ParamVector g = o->gradient(t);
      CHECK((g - finite_difference(*o, t)).norm() / (1.0 + g.norm()) <= 1e-5);
    }
  }
}

TEST_CASE("values are nonnegative everywhere probed") {
  const auto objs = one_of_each(41);
  std::mt19937_64 rng(42);
  for (const auto& o : objs)
    for (int i = 0; i < 50; ++i) CHECK(o->value(random_vector(o->dim(), rng, 5.0)) >= 0.0);
}

TEST_CASE("full-batch stochastic gradient equals the gradient bitwise") {
  const auto objs = one_of_each(51);
  std::mt19937_64 rng(52);
  for (const auto& o : objs) {
    const ParamVector t = random_vector(o->dim(), rng);
    const auto idx = all_indices(o->num_samples());
    CHECK(gifair::testing::bitwise_equal(o->stochastic_gradient(t, idx), o->gradient(t)));
  }
}

TEST_CASE("singleton gradients average to the full gradient") {
  const auto objs = one_of_each(61);
  std::mt19937_64 rng(62);
  for (const auto& o : objs) {
    const ParamVector t = random_vector(o->dim(), rng);
    ParamVector acc = ParamVector::Zero(t.size());
    const std::size_t n = o->num_samples();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t one[] = {i};
      acc += o->stochastic_gradient(t, one);
    }
    acc /= static_cast<double>(n);
    CHECK((acc - o->gradient(t)).norm() <= 1e-12 * std::max(1.0, o->gradient(t).norm()));
  }
}

TEST_CASE("random minibatch gradients are unbiased with 1/sqrt(draws) error") {
  auto ls = make_least_squares(regression_shard(40, 3, 71), 0.0);
  std::mt19937_64 prng(72);
  const ParamVector t = random_vector(3, prng);
  const ParamVector g = ls->gradient(t);
  Rng rng(73);
  ParamVector sum = ParamVector::Zero(3);
  double sq = 0.0;
  std::size_t draws = 0;
  for (std::size_t target : {100u, 1000u, 10000u}) {
    for (; draws < target; ++draws) {
      const auto b = draw_batch(rng, 40, 4);
      const ParamVector gb = ls->stochastic_gradient(t, b);
      sum += gb;
      sq += (gb - g).squaredNorm();
    }
    const double n = static_cast<double>(draws);
    const double tolerance = 4.0 * std::sqrt(sq / n / n);
    CHECK((sum / n - g).norm() <= tolerance);
  }
}

TEST_CASE("stochastic gradient rejects bad batches") {
  auto ls = make_least_squares(regression_shard(5, 2, 1), 0.0);
  const ParamVector t = ParamVector::Zero(2);
  CHECK_THROWS_AS(ls->stochastic_gradient(t, std::vector<std::size_t>{}), std::invalid_argument);
  CHECK_THROWS_AS(ls->stochastic_gradient(t, std::vector<std::size_t>{5}), std::out_of_range);
  CHECK_THROWS_AS(ls->value(ParamVector::Zero(3)), std::invalid_argument);
}

TEST_CASE("duplicate batch indices count with multiplicity") {
  auto ls = make_least_squares(regression_shard(5, 2, 2), 0.0);
  const ParamVector t = ParamVector::Ones(2);
  const std::vector<std::size_t> dup{1, 1, 3};
  const std::vector<std::size_t> one{1}, three{3};
  const ParamVector expect =
      (2.0 * ls->stochastic_gradient(t, one) + ls->stochastic_gradient(t, three)) / 3.0;
  CHECK((ls->stochastic_gradient(t, dup) - expect).norm() <= 1e-14);
}

TEST_CASE("estimate_constants is exact for quadratics") {
  auto q = make_quadratic(4, 10.0, ParamVector::Zero(4), 3, 1.0);
  const auto c = estimate_constants(*q, 1.0, 5, 1);
  CHECK(c.L == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(c.mu == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(c.lower_bound);
}

TEST_CASE("coincident probes do not divide by zero") {
  auto lg = make_logistic(binary_shard(10, 2, 1), 0.0);
  const auto c = estimate_constants(*lg, 0.0, 4, 1);
  CHECK(std::isfinite(c.L));
  CHECK(std::isfinite(c.sigma_sq));
  CHECK(std::isfinite(c.G_sq));
  CHECK(c.L >= c.mu);
  CHECK_THROWS_AS(estimate_constants(*lg, 1.0, 1, 1), std::invalid_argument);
}

TEST_CASE("dataset shard validation") {
  DatasetShard s;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.features = FeatureMatrix::Zero(3, 2);
  s.labels = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.labels = Eigen::VectorXd::Zero(3);
  CHECK_NOTHROW(s.validate());
  s.features(1, 1) = std::nan("");
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("derived streams are deterministic and separated by tag and index") {
  auto a = derive_stream(5, StreamTag::sampling, 1, 2, 3);
  auto b = derive_stream(5, StreamTag::sampling, 1, 2, 3);
  CHECK(a() == b());
  CHECK(derive_stream(5, StreamTag::sampling, 1)() != derive_stream(5, StreamTag::local_update, 1)());
  CHECK(derive_stream(5, StreamTag::sampling, 1)() != derive_stream(5, StreamTag::sampling, 2)());
  CHECK(derive_stream(5, StreamTag::sampling, 1)() != derive_stream(6, StreamTag::sampling, 1)());
}

TEST_CASE("draw_batch returns sorted distinct indices") {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto b = draw_batch(rng, 20, 7);
    CHECK(b.size() == 7);
    CHECK(std::is_sorted(b.begin(), b.end()));
    CHECK(std::set<std::size_t>(b.begin(), b.end()).size() == 7);
    CHECK(b.back() < 20);
  }
}

TEST_CASE("draw_batch with batch >= n leaves the stream untouched") {
  Rng a(9), b(9);
  const auto full = draw_batch(a, 5, 8);
  CHECK(full == all_indices(5));
  CHECK(a() == b());
}

}  // TEST_SUITE
