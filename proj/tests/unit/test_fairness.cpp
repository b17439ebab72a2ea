#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gifair/fairness/fairness.hpp"
#include "test_util.hpp"

using namespace gifair;
using gifair::testing::equal_groups;
using gifair::testing::random_vector;

namespace {

/// sum_k p_k F_k + lambda sum_{i<j} |L_i - L_j|, written out independently.
double direct_by_hand(const std::vector<double>& f, const FederationSpec& fed, double lambda) {
  const std::size_t d = fed.num_groups();
  std::vector<double> sum(d, 0.0);
  std::vector<double> cnt(d, 0.0);
  double avg = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    avg += fed.weight(k) * f[k];
    sum[fed.group_of(k)] += f[k];
    cnt[fed.group_of(k)] += 1.0;
  }
  double pen = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) pen += std::abs(sum[i] / cnt[i] - sum[j] / cnt[j]);
  return avg + lambda * pen;
}

}  // namespace

TEST_SUITE("fairness") {

TEST_CASE("group losses") {
  auto f = FederationSpec::create({0, 0, 1}, 2, {1, 1, 1});
  const std::vector<double> losses{1.0, 3.0, 5.0};
  CHECK(group_losses(losses, f) == std::vector<double>{2.0, 5.0});
  const std::vector<double> swapped{3.0, 1.0, 5.0};
  CHECK(group_losses(swapped, f) == std::vector<double>{2.0, 5.0});
  const std::vector<double> flat{0.7, 0.7, 0.7};
  CHECK(group_losses(flat, f) == std::vector<double>{0.7, 0.7});
}

TEST_CASE("group losses reject bad input") {
  auto f = FederationSpec::create({0, 0, 1}, 2, {1, 1, 1});
  CHECK_THROWS_AS(group_losses(std::vector<double>{1.0, std::nan(""), 2.0}, f), std::invalid_argument);
  CHECK_THROWS_AS(group_losses(std::vector<double>{1.0, -1.0, 2.0}, f), std::invalid_argument);
  CHECK_THROWS_AS(group_losses(std::vector<double>{1.0, 2.0}, f), std::invalid_argument);
}

TEST_CASE("rank coefficients for a strict four-group ordering") {
  const auto f = equal_groups(4, 2);
  const std::vector<double> L{4.0, 3.0, 2.0, 1.0};
  CHECK(rank_coefficients(L, f) == RankVector{3, 3, 1, 1, -1, -1, -3, -3});
}

TEST_CASE("rank coefficients for ties and two groups") {
  const auto f = equal_groups(3, 2);
  CHECK(rank_coefficients(std::vector<double>{2.0, 2.0, 2.0}, f) == RankVector(6, 0));
  CHECK(rank_coefficients(std::vector<double>{1.0, 1.0, 3.0}, f) == RankVector{-1, -1, -1, -1, 2, 2});
  const auto two = equal_groups(2, 2);
  CHECK(rank_coefficients(std::vector<double>{1.0, 2.0}, two) == RankVector{-1, -1, 1, 1});
  CHECK_THROWS_AS(rank_coefficients(std::vector<double>{1.0}, two), std::invalid_argument);
}

TEST_CASE("lambda_max formula") {
  CHECK(lambda_max(equal_groups(4, 10)) == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
  CHECK(lambda_max(equal_groups(2, 5)) == doctest::Approx(0.5).epsilon(1e-15));
  auto a = FederationSpec::create({0, 1, 1, 0, 2}, 3, {3, 1, 4, 1, 5});
  auto b = FederationSpec::create({0, 1, 1, 0, 2}, 3, {30, 10, 40, 10, 50});
  CHECK(lambda_max(a) == doctest::Approx(lambda_max(b)).epsilon(1e-15));
  // min over k of p_k |A_{s_k}| / (d - 1): client 1 has p = 1/14 in a group of 2
  CHECK(lambda_max(a) == doctest::Approx((1.0 / 14.0) * 2.0 / 2.0).epsilon(1e-15));
}

TEST_CASE("fairness config enforces 0 <= lambda < lambda_max") {
  const auto f = equal_groups(2, 5);
  CHECK_NOTHROW(FairnessConfig(0.0, f));
  CHECK_NOTHROW(FairnessConfig(0.4999, f));
  CHECK_THROWS_AS(FairnessConfig(0.5, f), std::invalid_argument);
  CHECK_THROWS_AS(FairnessConfig(0.7, f), std::invalid_argument);
  CHECK_THROWS_AS(FairnessConfig(-0.1, f), std::invalid_argument);
  CHECK_THROWS_AS(FairnessConfig(std::nan(""), f), std::invalid_argument);
}

TEST_CASE("local weight is 1 without fairness") {
  const auto f = equal_groups(3, 2);
  const FairnessConfig cfg(0.0, f);
  const RankVector r{2, 2, 0, 0, -2, -2};
  for (std::size_t k = 0; k < 6; ++k) CHECK(local_weight(k, r, cfg) == 1.0);
  const FairnessConfig on(0.1, f);
  CHECK(local_weight(2, r, on) == 1.0);
}

TEST_CASE("four groups of ten clients with lambda 0.05") {
  const auto f = equal_groups(4, 10);
  const FairnessConfig cfg(0.05, f);
  const std::vector<double> L{4.0, 3.0, 2.0, 1.0};
  const auto r = rank_coefficients(L, f);
  CHECK(local_weight(0, r, cfg) == doctest::Approx(1.6).epsilon(1e-15));
  CHECK(f.weight(0) * local_weight(0, r, cfg) == doctest::Approx(0.04).epsilon(1e-15));
  const double lam = 0.05, p = 1.0 / 40.0;
  const double layout[4] = {1 + 3 * lam / (10 * p), 1 + lam / (10 * p), 1 - lam / (10 * p),
                            1 - 3 * lam / (10 * p)};
  for (std::size_t k = 0; k < 40; ++k)
    CHECK(local_weight(k, r, cfg) == doctest::Approx(layout[k / 10]).epsilon(1e-15));
  CHECK(weight_product(0, r, cfg) == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("individual fairness with one client per group") {
  auto f = FederationSpec::create({0, 1, 2}, 3, {1, 2, 3});
  const double lam = 0.9 * lambda_max(f);
  const FairnessConfig cfg(lam, f);
  const std::vector<double> losses{3.0, 1.0, 2.0};
  const auto r = rank_coefficients(losses, f);
  CHECK(r == RankVector{2, -2, 0});
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(f.weight(k) * local_weight(k, r, cfg) ==
          doctest::Approx(f.weight(k) * (1.0 + lam * r[k] / f.weight(k))).epsilon(1e-14));
  CHECK(objective_weighted_from_losses(losses, cfg) ==
        doctest::Approx(direct_by_hand(losses, f, lam)).epsilon(1e-14));
}

TEST_CASE("pairwise penalty") {
  CHECK(pairwise_penalty(std::vector<double>{2, 2, 2}) == 0.0);
  CHECK(pairwise_penalty(std::vector<double>{1, 4}) == 3.0);
  CHECK(pairwise_penalty(std::vector<double>{1, 2, 4}) == 6.0);
}

TEST_CASE("objective without fairness is the weighted average loss") {
  auto f = FederationSpec::create({0, 1, 1}, 2, {1, 2, 5});
  const std::vector<double> losses{1.0, 2.0, 4.0};
  const double avg = (1.0 * 1 + 2.0 * 2 + 4.0 * 5) / 8.0;
  CHECK(objective_direct_from_losses(losses, FairnessConfig(0.0, f)) == doctest::Approx(avg));
  CHECK(objective_weighted_from_losses(losses, FairnessConfig(0.0, f)) == doctest::Approx(avg));
  const std::vector<double> tied{3.0, 1.0, 5.0};
  const FairnessConfig on(0.5 * lambda_max(f), f);
  const double tied_avg = (3.0 * 1 + 1.0 * 2 + 5.0 * 5) / 8.0;
  CHECK(objective_direct_from_losses(tied, on) == doctest::Approx(tied_avg).epsilon(1e-14));
  CHECK(objective_weighted_from_losses(tied, on) == doctest::Approx(tied_avg).epsilon(1e-14));
}

TEST_CASE("direct and weighted objectives agree at 100 random points") {
  std::mt19937_64 rng(11);
  auto f = FederationSpec::create({0, 1, 2, 0, 1, 2, 2}, 3, {4, 1, 7, 2, 9, 3, 5});
  std::vector<ObjectivePtr> objs;
  for (std::size_t k = 0; k < 7; ++k)
    objs.push_back(make_quadratic(3, 5.0, random_vector(3, rng), k, 1.0, 0.3 * double(k % 3)));
  const double lam = 0.8 * lambda_max(f);
  const FairnessConfig cfg(lam, f);
  for (int i = 0; i < 100; ++i) {
    const ParamVector t = random_vector(3, rng, 2.0);
    const auto losses = client_losses(t, objs);
    const double hand = direct_by_hand(losses, f, lam);
    const double direct = global_objective_direct(t, objs, cfg);
    const double weighted = global_objective_weighted(t, objs, cfg);
    CHECK(std::abs(direct - hand) <= 1e-12 * (1.0 + std::abs(hand)));
    CHECK(std::abs(direct - weighted) <= 1e-10 * (1.0 + std::abs(direct)));
  }
}

TEST_CASE("global gradient matches finite differences of the rank-frozen objective") {
  std::mt19937_64 rng(12);
  const auto f = equal_groups(2, 2);
  std::vector<ObjectivePtr> objs;
  for (std::size_t k = 0; k < 4; ++k)
    objs.push_back(make_quadratic(2, 3.0, random_vector(2, rng), k, 1.0, k < 2 ? 5.0 : 0.0));
  const FairnessConfig cfg(0.3, f);
  const ParamVector t = random_vector(2, rng, 0.2);
  const auto r = rank_coefficients(group_losses(client_losses(t, objs), f), f);
  REQUIRE(r[0] == 1);
  auto frozen = [&](const ParamVector& x) {
    double s = 0.0;
    for (std::size_t k = 0; k < 4; ++k) s += f.weight(k) * local_weight(k, r, cfg) * objs[k]->value(x);
    return s;
  };
  const ParamVector g = global_gradient(t, objs, cfg);
  for (Eigen::Index i = 0; i < 2; ++i) {
    ParamVector a = t, b = t;
    a[i] += 1e-6;
    b[i] -= 1e-6;
    CHECK(g[i] == doctest::Approx((frozen(a) - frozen(b)) / 2e-6).epsilon(1e-6));
  }
}

TEST_CASE("property: rank parity, zero sum, within-group equality") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 2 + trial % 5;
    const auto f = equal_groups(d, 1 + trial % 3);
    std::vector<double> L(d);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (auto& v : L) v = u(rng);
    const auto r = rank_coefficients(L, f);
    int sum = 0;
    for (std::size_t i = 0; i < d; ++i) {
      const int ri = r[f.members(i).front()];
      CHECK((ri + static_cast<int>(d) - 1) % 2 == 0);
      CHECK(std::abs(ri) <= static_cast<int>(d) - 1);
      for (std::size_t k : f.members(i)) CHECK(r[k] == ri);
      sum += ri;
    }
    CHECK(sum == 0);
  }
}

TEST_CASE("property: higher group loss never gets a smaller weight") {
  std::mt19937_64 rng(14);
  const auto f = equal_groups(5, 2);
  const FairnessConfig cfg(0.9 * lambda_max(f), f);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> L(5);
    std::uniform_int_distribution<int> u(0, 4);
    for (auto& v : L) v = u(rng);
    const auto r = rank_coefficients(L, f);
    for (std::size_t a = 0; a < 10; ++a)
      for (std::size_t b = 0; b < 10; ++b)
        if (L[f.group_of(a)] > L[f.group_of(b)])
          CHECK(local_weight(a, r, cfg) > local_weight(b, r, cfg));
  }
}

TEST_CASE("property: penalty vanishes exactly when group losses have zero variance") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> L(2 + trial % 4);
    std::uniform_int_distribution<int> u(0, trial % 3);
    for (auto& v : L) v = 0.5 * u(rng);
    const double mean = std::accumulate(L.begin(), L.end(), 0.0) / double(L.size());
    double var = 0.0;
    for (double v : L) var += (v - mean) * (v - mean);
    CHECK((pairwise_penalty(L) == 0.0) == (var == 0.0));
  }
}

TEST_CASE("property: weights stay positive across the lambda sweep") {
  auto f = FederationSpec::create({0, 1, 2, 3, 0, 1, 2, 3, 3}, 4, {5, 1, 2, 8, 3, 3, 7, 1, 2});
  std::vector<double> L{4.0, 1.0, 3.0, 2.0};
  for (const auto& order : {std::vector<double>{4, 1, 3, 2}, std::vector<double>{1, 2, 3, 4},
                            std::vector<double>{2, 2, 1, 1}}) {
    const auto r = rank_coefficients(order, f);
    for (int i = 0; i <= 9; ++i) {
      const FairnessConfig cfg(0.1 * i * lambda_max(f), f);
      for (std::size_t k = 0; k < 9; ++k) {
        CHECK(local_weight(k, r, cfg) > 0.0);
        CHECK(local_weight(k, r, cfg) < 2.0);
      }
    }
  }
}

TEST_CASE("weight product validates the rank vector length") {
  const auto f = equal_groups(2, 2);
  const FairnessConfig cfg(0.1, f);
  CHECK_THROWS_AS(weight_product(0, RankVector{1, 1}, cfg), std::invalid_argument);
}

}  // TEST_SUITE
