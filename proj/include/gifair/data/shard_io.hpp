#pragma once

#include <filesystem>

#include "gifair/model/dataset.hpp"

namespace gifair {

// Binary shard layout (all little-endian):
//   bytes 0..3   magic "GFSH"
//   u32          format version (1)
//   u64          N (rows)
//   u64          m (feature columns)
//   f64[N*m]     features, row-major
//   f64[N]       labels
//
// CSV layout: header "x0,...,x{m-1},y", one row per sample, reals printed
// with 17 significant digits.

void write_shard_binary(const std::filesystem::path& path, const DatasetShard& shard);
DatasetShard read_shard_binary(const std::filesystem::path& path);

void write_shard_csv(const std::filesystem::path& path, const DatasetShard& shard);
DatasetShard read_shard_csv(const std::filesystem::path& path);

}  // namespace gifair
