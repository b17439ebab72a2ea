#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "gifair/data/federation.hpp"
#include "gifair/data/partition.hpp"
#include "gifair/data/shard_io.hpp"
#include "gifair/errors.hpp"
#include "gifair/fairness/fairness.hpp"
#include "gifair/harness/gamma.hpp"
#include "test_util.hpp"

using namespace gifair;
using gifair::testing::scratch_dir;

namespace {

/// Pool whose label is the row index, so rows can be traced through a partition.
DatasetShard indexed_pool(std::size_t n) {
  DatasetShard s;
  s.features = FeatureMatrix::Zero(static_cast<Eigen::Index>(n), 2);
  s.labels.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    s.features(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i) * 0.5;
    s.labels[static_cast<Eigen::Index>(i)] = static_cast<double>(i);
  }
  return s;
}

bool same_shard(const DatasetShard& a, const DatasetShard& b) {
  return a.features == b.features && a.labels == b.labels;
}

std::set<double> label_set(const DatasetShard& s) {
  return {s.labels.data(), s.labels.data() + s.labels.size()};
}

/// Normal-equation solve on the concatenation of shards (an independent
/// least-squares oracle).
Eigen::VectorXd pooled_least_squares(const std::vector<DatasetShard>& shards) {
  const Eigen::Index m = shards.front().features.cols();
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(m);
  for (const auto& s : shards) {
    xtx += s.features.transpose() * s.features;
    xty += s.features.transpose() * s.labels;
  }
  return xtx.ldlt().solve(xty);
}

double mse_half(const DatasetShard& s, const Eigen::VectorXd& theta) {
  return 0.5 * (s.features * theta - s.labels).squaredNorm() / static_cast<double>(s.size());
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("compute_weights") {
  const std::vector<std::size_t> eq{7, 7, 7, 7};
  for (double p : compute_weights(eq)) CHECK(p == 0.25);
  const std::vector<std::size_t> c{1, 3};
  const auto w = compute_weights(c);
  CHECK(w[0] == 0.25);
  CHECK(w[1] == 0.75);
  CHECK_THROWS_AS(compute_weights(std::vector<std::size_t>{}), std::invalid_argument);
  CHECK_THROWS_AS(compute_weights(std::vector<std::size_t>{3, 0}), std::invalid_argument);
}

TEST_CASE("compute_weights is permutation equivariant and normalized") {
  const std::vector<std::size_t> c{5, 1, 9, 13, 2, 8};
  std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
  std::vector<std::size_t> cp(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) cp[i] = c[perm[i]];
  const auto w = compute_weights(c), wp = compute_weights(cp);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(wp[i] == w[perm[i]]);
  CHECK(std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0) <= 1e-12);
}

TEST_CASE("federation validation") {
  CHECK_THROWS_AS(FederationSpec::create({0, 0, 0}, 1, {1, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(FederationSpec::create({0, 1}, 3, {1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(FederationSpec::create({0, 0, 2}, 3, {1, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(FederationSpec::create({0, 5}, 2, {1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(FederationSpec::create({0, 1}, 2, {1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(FederationSpec::create({0, 1}, 2, {1}), std::invalid_argument);
  const std::vector<std::size_t> sizes{2, 0, 1};
  CHECK_THROWS_AS(FederationSpec::from_group_sizes(sizes, {1, 1, 1}), std::invalid_argument);
}

TEST_CASE("federation accessors and d = K") {
  auto f = FederationSpec::create({1, 0, 1, 2}, 3, {2, 2, 4, 8});
  CHECK(f.num_clients() == 4);
  CHECK(f.num_groups() == 3);
  CHECK(f.group_size(1) == 2);
  CHECK(f.members(1) == std::vector<std::size_t>{0, 2});
  CHECK(f.weight(3) == 0.5);
  CHECK_NOTHROW(FederationSpec::create({2, 0, 1}, 3, {1, 1, 1}));
}

TEST_CASE("partition_iid with one client returns a permutation of the pool") {
  const auto pool = indexed_pool(30);
  const std::vector<std::size_t> sizes{30};
  const auto shards = partition_iid(pool, 1, sizes, 4);
  REQUIRE(shards.size() == 1);
  CHECK(label_set(shards[0]) == label_set(pool));
}

TEST_CASE("partition_iid shards are disjoint with the requested sizes") {
  const auto pool = indexed_pool(100);
  const std::vector<std::size_t> sizes{10, 25, 5, 40};
  const auto shards = partition_iid(pool, 4, sizes, 5);
  std::set<double> seen;
  std::size_t total = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(shards[k].size() == sizes[k]);
    total += shards[k].size();
    for (Eigen::Index r = 0; r < shards[k].labels.size(); ++r) {
      seen.insert(shards[k].labels[r]);
      CHECK(shards[k].features(r, 0) == shards[k].labels[r] * 0.5);
    }
  }
  CHECK(seen.size() == total);
}

TEST_CASE("partition_iid rejects oversubscription and bad size lists") {
  const auto pool = indexed_pool(10);
  CHECK_THROWS_AS(partition_iid(pool, 2, std::vector<std::size_t>{6, 5}, 1), std::invalid_argument);
  CHECK_THROWS_AS(partition_iid(pool, 2, std::vector<std::size_t>{6}, 1), std::invalid_argument);
  CHECK_THROWS_AS(partition_iid(pool, 2, std::vector<std::size_t>{6, 0}, 1), std::invalid_argument);
}

TEST_CASE("partition_iid label histograms stay within 3 sigma of the pool") {
  const std::size_t classes = 4, per_class = 1000, n_k = 500;
  const auto pool = make_classification_pool(classes, per_class, 2, 1.0, 8);
  const std::vector<std::size_t> sizes(4, n_k);
  const auto shards = partition_iid(pool, 4, sizes, 9);
  const double p = 1.0 / static_cast<double>(classes);
  const double sigma = std::sqrt(static_cast<double>(n_k) * p * (1.0 - p));
  for (const auto& s : shards) {
    std::map<int, int> hist;
    for (Eigen::Index r = 0; r < s.labels.size(); ++r) ++hist[static_cast<int>(s.labels[r])];
    for (std::size_t c = 0; c < classes; ++c)
      CHECK(std::abs(hist[static_cast<int>(c)] - static_cast<double>(n_k) * p) <= 3.0 * sigma);
  }
}

TEST_CASE("label skew gives every client exactly c classes") {
  const auto pool = make_classification_pool(10, 300, 3, 2.0, 1);
  const auto shards = partition_label_skew(pool, 100, 5, 500, 2);
  REQUIRE(shards.size() == 100);
  for (const auto& s : shards) {
    CHECK(s.size() == 500);
    CHECK(label_set(s).size() == 5);
  }
}

TEST_CASE("label skew with all classes covers every class") {
  const auto pool = make_classification_pool(4, 50, 2, 2.0, 3);
  for (const auto& s : partition_label_skew(pool, 6, 4, 40, 4)) CHECK(label_set(s).size() == 4);
}

TEST_CASE("label skew is deterministic in the seed") {
  const auto pool = make_classification_pool(6, 50, 2, 2.0, 5);
  const auto a = partition_label_skew(pool, 8, 2, 20, 11);
  const auto b = partition_label_skew(pool, 8, 2, 20, 11);
  const auto c = partition_label_skew(pool, 8, 2, 20, 12);
  bool all_same = true, any_assignment_differs = false;
  for (std::size_t k = 0; k < 8; ++k) {
    all_same = all_same && same_shard(a[k], b[k]);
    any_assignment_differs = any_assignment_differs || label_set(a[k]) != label_set(c[k]);
  }
  CHECK(all_same);
  CHECK(any_assignment_differs);
}

TEST_CASE("label skew rejects infeasible requests") {
  const auto pool = make_classification_pool(3, 10, 2, 2.0, 5);
  CHECK_THROWS_AS(partition_label_skew(pool, 2, 4, 20, 1), std::invalid_argument);
  CHECK_THROWS_AS(partition_label_skew(pool, 2, 2, 40, 1), std::invalid_argument);
  CHECK_THROWS_AS(partition_label_skew(pool, 2, 3, 2, 1), std::invalid_argument);
  auto frac = pool;
  frac.labels[0] = 0.5;
  CHECK_THROWS_AS(partition_label_skew(frac, 2, 2, 4, 1), std::invalid_argument);
}

TEST_CASE("group-shifted federation has the requested group sizes") {
  const std::vector<std::size_t> sizes{60, 100, 40};
  std::vector<LinearGroupGenerator> gens(3);
  for (std::size_t i = 0; i < 3; ++i) gens[i].truth = Eigen::VectorXd::Constant(2, double(i));
  const auto g = partition_group_shifted(200, sizes, gens, 5, 1);
  CHECK(g.federation.num_groups() == 3);
  CHECK(g.federation.group_size(0) == 60);
  CHECK(g.federation.group_size(1) == 100);
  CHECK(g.federation.group_size(2) == 40);
  CHECK(g.shards.size() == 200);
  CHECK(g.federation.group_of(59) == 0);
  CHECK(g.federation.group_of(60) == 1);
  CHECK(g.federation.group_of(199) == 2);
}

TEST_CASE("group-shifted rejects empty groups and mismatches") {
  std::vector<LinearGroupGenerator> gens(2);
  gens[0].truth = gens[1].truth = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(partition_group_shifted(3, std::vector<std::size_t>{3, 0}, gens, 5, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(partition_group_shifted(4, std::vector<std::size_t>{2, 1}, gens, 5, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(partition_group_shifted(3, std::vector<std::size_t>{3}, std::span(gens).first(1),
                                          5, 1),
                  std::invalid_argument);
  gens[1].truth = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(partition_group_shifted(3, std::vector<std::size_t>{2, 1}, gens, 5, 1),
                  std::invalid_argument);
}

TEST_CASE("opposite regressors leave a positive group-loss margin at the pooled optimum") {
  std::vector<LinearGroupGenerator> gens(2);
  gens[0].truth = Eigen::VectorXd::Constant(2, 1.0 / std::sqrt(2.0));
  gens[1].truth = -gens[0].truth;
  gens[0].noise_sd = gens[1].noise_sd = 0.1;
  const std::vector<std::size_t> sizes{6, 2};
  const auto g = partition_group_shifted(8, sizes, gens, 200, 3);
  const Eigen::VectorXd pooled = pooled_least_squares(g.shards);
  double l0 = 0.0, l1 = 0.0;
  for (std::size_t k = 0; k < 8; ++k)
    (g.federation.group_of(k) == 0 ? l0 : l1) += mse_half(g.shards[k], pooled);
  l0 /= 6.0;
  l1 /= 2.0;
  // population values are 0.125 and 1.125 (plus half the noise variance)
  CHECK(l1 - l0 > 0.5);
}

TEST_CASE("identical generators look like an i.i.d. partition to the gamma diagnostic") {
  LinearGroupGenerator gen;
  gen.truth = Eigen::VectorXd::Ones(2);
  gen.noise_sd = 0.5;
  const std::vector<LinearGroupGenerator> gens{gen, gen};
  const std::vector<std::size_t> sizes{4, 4};
  const std::size_t n = 30, seeds = 12;
  std::vector<double> shifted, iid;
  for (std::uint64_t s = 0; s < seeds; ++s) {
    auto g = partition_group_shifted(8, sizes, gens, n, 100 + s);
    std::vector<ObjectivePtr> objs;
    for (auto& sh : g.shards) objs.push_back(make_least_squares(sh, 0.0));
    const FairnessConfig cfg(0.0, g.federation);
    shifted.push_back(gamma_diagnostics(objs, cfg).gamma_k);

    Rng rng = derive_stream(200 + s, StreamTag::data);
    const auto pool = gen.sample(8 * n, rng);
    const std::vector<std::size_t> each(8, n);
    std::vector<ObjectivePtr> iobjs;
    for (auto& sh : partition_iid(pool, 8, each, 300 + s)) iobjs.push_back(make_least_squares(sh, 0.0));
    iid.push_back(gamma_diagnostics(iobjs, cfg).gamma_k);
  }
  auto stats = [](const std::vector<double>& v) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    double s2 = 0.0;
    for (double x : v) s2 += (x - m) * (x - m);
    return std::pair{m, s2 / double(v.size() - 1) / double(v.size())};
  };
  const auto [ma, va] = stats(shifted);
  const auto [mb, vb] = stats(iid);
  CHECK(std::abs(ma - mb) <= 3.0 * std::sqrt(va + vb));
}

TEST_CASE("group-shifted generation is deterministic") {
  std::vector<LinearGroupGenerator> gens(2);
  gens[0].truth = Eigen::VectorXd::Ones(3);
  gens[1].truth = -Eigen::VectorXd::Ones(3);
  const std::vector<std::size_t> sizes{2, 3};
  const auto a = partition_group_shifted(5, sizes, gens, 7, 9);
  const auto b = partition_group_shifted(5, sizes, gens, 7, 9);
  for (std::size_t k = 0; k < 5; ++k) CHECK(same_shard(a.shards[k], b.shards[k]));
}

TEST_CASE("split_shard sizes and coverage") {
  const auto pool = indexed_pool(50);
  const auto s = split_shard(pool, 0.7, 0.1, 3);
  CHECK(s.train.size() == 35);
  CHECK(s.validation.size() == 5);
  CHECK(s.test.size() == 10);
  std::set<double> all = label_set(s.train);
  for (double v : label_set(s.validation)) all.insert(v);
  for (double v : label_set(s.test)) all.insert(v);
  CHECK(all == label_set(pool));
  CHECK_THROWS_AS(split_shard(indexed_pool(3), 0.7, 0.1, 3), std::invalid_argument);
  CHECK_THROWS_AS(split_shard(pool, 0.9, 0.1, 3), std::invalid_argument);
}

TEST_CASE("binary shard files round-trip bitwise") {
  const auto dir = scratch_dir("shard_bin");
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z(0.0, 1e3);
  auto shard = gifair::testing::random_shard(13, 4, rng, [&z](std::size_t, auto& g) { return z(g); });
  shard.features(0, 0) = -0.0;
  shard.labels[1] = 1e-300;
  write_shard_binary(dir / "a.bin", shard);
  CHECK(same_shard(read_shard_binary(dir / "a.bin"), shard));
  CHECK(std::filesystem::file_size(dir / "a.bin") == 4 + 4 + 8 + 8 + 8 * (13 * 4 + 13));
}

TEST_CASE("CSV shard files round-trip bitwise") {
  const auto dir = scratch_dir("shard_csv");
  std::mt19937_64 rng(5);
  auto shard = gifair::testing::random_shard(9, 3, rng, [](std::size_t r, auto&) { return r / 7.0; });
  write_shard_csv(dir / "a.csv", shard);
  CHECK(same_shard(read_shard_csv(dir / "a.csv"), shard));
  std::ifstream in(dir / "a.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "x0,x1,x2,y");
}

TEST_CASE("malformed shard files raise io errors") {
  const auto dir = scratch_dir("shard_bad");
  CHECK_THROWS_AS(read_shard_binary(dir / "missing.bin"), IoError);
  CHECK_THROWS_AS(read_shard_csv(dir / "missing.csv"), IoError);
  { std::ofstream(dir / "magic.bin") << "NOPE0000"; }
  CHECK_THROWS_AS(read_shard_binary(dir / "magic.bin"), IoError);
  const auto shard = indexed_pool(4);
  write_shard_binary(dir / "trunc.bin", shard);
  std::filesystem::resize_file(dir / "trunc.bin", 40);
  CHECK_THROWS_AS(read_shard_binary(dir / "trunc.bin"), IoError);
  { std::ofstream(dir / "ragged.csv") << "x0,y\n1,2\n3\n"; }
  CHECK_THROWS_AS(read_shard_csv(dir / "ragged.csv"), IoError);
  { std::ofstream(dir / "junk.csv") << "x0,y\n1,abc\n"; }
  CHECK_THROWS_AS(read_shard_csv(dir / "junk.csv"), IoError);
}

}  // TEST_SUITE
