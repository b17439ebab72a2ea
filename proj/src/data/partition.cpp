#include "gifair/data/partition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace gifair {

namespace {

std::vector<std::size_t> shuffled_range(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

}  // namespace

std::vector<DatasetShard> partition_iid(const DatasetShard& pool, std::size_t num_clients,
                                        std::span<const std::size_t> sizes,
                                        std::uint64_t rng_seed) {
  pool.validate();
  if (num_clients == 0 || sizes.size() != num_clients)
    throw std::invalid_argument("partition_iid: need one size per client");
  std::size_t total = 0;
  for (std::size_t s : sizes) {
    if (s == 0) throw std::invalid_argument("partition_iid: every shard needs >= 1 sample");
    total += s;
  }
  if (total > pool.size())
    throw std::invalid_argument("partition_iid: requested " + std::to_string(total) +
                                " samples from a pool of " + std::to_string(pool.size()));
  Rng rng = derive_stream(rng_seed, StreamTag::data);
  const auto order = shuffled_range(pool.size(), rng);
  std::vector<DatasetShard> shards;
  shards.reserve(num_clients);
  std::size_t offset = 0;
  for (std::size_t s : sizes) {
    shards.push_back(pool.subset(std::span(order).subspan(offset, s)));
    offset += s;
  }
  return shards;
}

std::vector<DatasetShard> partition_label_skew(const DatasetShard& pool, std::size_t num_clients,
                                               std::size_t classes_per_client,
                                               std::size_t samples_per_client,
                                               std::uint64_t rng_seed) {
  pool.validate();
  if (num_clients == 0) throw std::invalid_argument("partition_label_skew: no clients");
  std::map<long long, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double y = pool.labels(static_cast<Eigen::Index>(i));
    if (y != std::floor(y))
      throw std::invalid_argument("partition_label_skew: labels must be integer class ids");
    by_class[static_cast<long long>(y)].push_back(i);
  }
  const std::size_t num_classes = by_class.size();
  if (classes_per_client == 0 || classes_per_client > num_classes)
    throw std::invalid_argument("partition_label_skew: classes_per_client=" +
                                std::to_string(classes_per_client) + " but the pool has " +
                                std::to_string(num_classes) + " classes");
  if (samples_per_client < classes_per_client)
    throw std::invalid_argument(
        "partition_label_skew: samples_per_client must be >= classes_per_client so every chosen "
        "class is represented");
  const std::size_t base_quota = samples_per_client / classes_per_client;
  const std::size_t remainder = samples_per_client % classes_per_client;
  const std::size_t largest_quota = base_quota + (remainder > 0 ? 1 : 0);
  for (const auto& [label, rows] : by_class)
    if (rows.size() < largest_quota)
      throw std::invalid_argument("partition_label_skew: class " + std::to_string(label) +
                                  " has " + std::to_string(rows.size()) +
                                  " rows but a per-client quota of " +
                                  std::to_string(largest_quota));

  std::vector<const std::vector<std::size_t>*> class_rows;
  for (const auto& [label, rows] : by_class) class_rows.push_back(&rows);

  std::vector<DatasetShard> shards;
  shards.reserve(num_clients);
  for (std::size_t k = 0; k < num_clients; ++k) {
    Rng rng = derive_stream(rng_seed, StreamTag::data, k);
    auto classes = shuffled_range(num_classes, rng);
    classes.resize(classes_per_client);
    std::sort(classes.begin(), classes.end());
    std::vector<std::size_t> rows;
    rows.reserve(samples_per_client);
    for (std::size_t j = 0; j < classes.size(); ++j) {
      const auto& pool_rows = *class_rows[classes[j]];
      const std::size_t quota = base_quota + (j < remainder ? 1 : 0);
      auto pick = shuffled_range(pool_rows.size(), rng);
      for (std::size_t q = 0; q < quota; ++q) rows.push_back(pool_rows[pick[q]]);
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    shards.push_back(pool.subset(rows));
  }
  return shards;
}

DatasetShard LinearGroupGenerator::sample(std::size_t n, Rng& rng) const {
  if (n == 0) throw std::invalid_argument("generator: need at least one sample");
  if (truth.size() == 0) throw std::invalid_argument("generator: empty ground-truth vector");
  std::normal_distribution<double> feature(feature_mean, feature_sd);
  std::normal_distribution<double> noise(0.0, noise_sd);
  DatasetShard shard;
  const auto rows = static_cast<Eigen::Index>(n);
  shard.features.resize(rows, truth.size());
  shard.labels.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < truth.size(); ++j) shard.features(i, j) = feature(rng);
    shard.labels(i) = shard.features.row(i).dot(truth) + (noise_sd > 0.0 ? noise(rng) : 0.0);
  }
  return shard;
}

GroupShiftedFederation partition_group_shifted(std::size_t num_clients,
                                               std::span<const std::size_t> group_sizes,
                                               std::span<const LinearGroupGenerator> generators,
                                               std::size_t samples_per_client,
                                               std::uint64_t rng_seed) {
  if (group_sizes.size() < 2)
    throw std::invalid_argument("partition_group_shifted: need at least two groups");
  if (generators.size() != group_sizes.size())
    throw std::invalid_argument("partition_group_shifted: need one generator per group");
  const std::size_t total = std::accumulate(group_sizes.begin(), group_sizes.end(), std::size_t{0});
  if (total != num_clients)
    throw std::invalid_argument("partition_group_shifted: group sizes sum to " +
                                std::to_string(total) + ", expected K=" +
                                std::to_string(num_clients));
  for (const auto& g : generators)
    if (g.truth.size() != generators.front().truth.size())
      throw std::invalid_argument("partition_group_shifted: generators disagree on dimension");
  if (samples_per_client == 0)
    throw std::invalid_argument("partition_group_shifted: samples_per_client must be >= 1");

  auto federation = FederationSpec::from_group_sizes(
      group_sizes, std::vector<std::size_t>(num_clients, samples_per_client));
  std::vector<DatasetShard> shards;
  shards.reserve(num_clients);
  for (std::size_t k = 0; k < num_clients; ++k) {
    Rng rng = derive_stream(rng_seed, StreamTag::data, k);
    shards.push_back(generators[federation.group_of(k)].sample(samples_per_client, rng));
  }
  return {std::move(federation), std::move(shards)};
}

DatasetShard make_classification_pool(std::size_t num_classes, std::size_t per_class,
                                      std::size_t feature_dim, double separation,
                                      std::uint64_t rng_seed) {
  if (num_classes == 0 || per_class == 0 || feature_dim == 0)
    throw std::invalid_argument("classification pool: sizes must be positive");
  Rng rng = derive_stream(rng_seed, StreamTag::data, 0xC1A55);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto m = static_cast<Eigen::Index>(feature_dim);
  Eigen::MatrixXd centres(static_cast<Eigen::Index>(num_classes), m);
  for (Eigen::Index c = 0; c < centres.rows(); ++c) {
    for (Eigen::Index j = 0; j < m; ++j) centres(c, j) = normal(rng);
    centres.row(c) *= separation / centres.row(c).norm();
  }
  DatasetShard pool;
  const auto n = static_cast<Eigen::Index>(num_classes * per_class);
  pool.features.resize(n, m);
  pool.labels.resize(n);
  Eigen::Index row = 0;
  for (Eigen::Index c = 0; c < centres.rows(); ++c) {
    for (std::size_t i = 0; i < per_class; ++i, ++row) {
      for (Eigen::Index j = 0; j < m; ++j) pool.features(row, j) = centres(c, j) + normal(rng);
      pool.labels(row) = static_cast<double>(c);
    }
  }
  return pool;
}

ShardSplit split_shard(const DatasetShard& shard, double train_fraction, double val_fraction,
                       std::uint64_t rng_seed) {
  shard.validate();
  if (!(train_fraction > 0.0) || !(val_fraction >= 0.0) || train_fraction + val_fraction >= 1.0)
    throw std::invalid_argument("split_shard: need train > 0, val >= 0, train + val < 1");
  const std::size_t n = shard.size();
  const auto n_val = static_cast<std::size_t>(std::floor(val_fraction * n + 1e-9));
  const auto n_test =
      static_cast<std::size_t>(std::floor((1.0 - train_fraction - val_fraction) * n + 0.5));
  if (n_val == 0 || n_test == 0 || n_val + n_test >= n)
    throw std::invalid_argument("split_shard: " + std::to_string(n) +
                                " samples are too few for a non-empty train/validation/test split");
  Rng rng = derive_stream(rng_seed, StreamTag::split);
  const auto order = shuffled_range(n, rng);
  const std::span<const std::size_t> all(order);
  const std::size_t n_train = n - n_val - n_test;
  return {shard.subset(all.subspan(0, n_train)), shard.subset(all.subspan(n_train, n_val)),
          shard.subset(all.subspan(n_train + n_val, n_test))};
}

}  // namespace gifair
