#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gifair/data/federation.hpp"
#include "gifair/model/dataset.hpp"
#include "gifair/model/rng.hpp"

namespace gifair {

/// Disjoint uniform random shards with the requested sizes. sizes.size()
/// must equal K and the total must not exceed the pool.
std::vector<DatasetShard> partition_iid(const DatasetShard& pool, std::size_t num_clients,
                                        std::span<const std::size_t> sizes,
                                        std::uint64_t rng_seed);

/// Each client receives samples from exactly `classes_per_client` classes.
/// Class subsets are drawn uniformly without replacement, independently per
/// client. The client's quota is split as evenly as possible across its
/// classes and drawn without replacement from each class; different clients
/// may reuse the same pool rows, so the pool is never exhausted globally.
/// Labels must be integer-valued. Infeasible requests (too few classes, a
/// class with fewer rows than a quota, fewer samples than classes) throw
/// std::invalid_argument with a diagnostic.
std::vector<DatasetShard> partition_label_skew(const DatasetShard& pool, std::size_t num_clients,
                                               std::size_t classes_per_client,
                                               std::size_t samples_per_client,
                                               std::uint64_t rng_seed);

/// y = x . truth + noise, x ~ N(feature_mean, feature_sd^2 I).
struct LinearGroupGenerator {
  Eigen::VectorXd truth;
  double noise_sd = 0.1;
  double feature_mean = 0.0;
  double feature_sd = 1.0;

  DatasetShard sample(std::size_t n, Rng& rng) const;
};

struct GroupShiftedFederation {
  FederationSpec federation;
  std::vector<DatasetShard> shards;
};

/// Contiguous groups of the given sizes; clients of group i draw their data
/// from generators[i]. K must equal the sum of group sizes and d >= 2.
GroupShiftedFederation partition_group_shifted(std::size_t num_clients,
                                               std::span<const std::size_t> group_sizes,
                                               std::span<const LinearGroupGenerator> generators,
                                               std::size_t samples_per_client,
                                               std::uint64_t rng_seed);

/// Pool of `per_class` rows for each of `num_classes` classes, features drawn
/// around random class centres at distance `separation`. Labels are 0..C-1.
DatasetShard make_classification_pool(std::size_t num_classes, std::size_t per_class,
                                      std::size_t feature_dim, double separation,
                                      std::uint64_t rng_seed);

struct ShardSplit {
  DatasetShard train;
  DatasetShard validation;
  DatasetShard test;
};

/// Random per-client split. Validation gets floor(val_fraction * N), test
/// gets floor((1 - train_fraction - val_fraction) * N + 0.5) and train the
/// rest; every part must end up non-empty.
ShardSplit split_shard(const DatasetShard& shard, double train_fraction, double val_fraction,
                       std::uint64_t rng_seed);

}  // namespace gifair
