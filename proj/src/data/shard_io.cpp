#include "gifair/data/shard_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "../common/little_endian.hpp"
#include "gifair/errors.hpp"

namespace gifair {

namespace {

constexpr std::uint32_t kShardVersion = 1;

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_shard_binary(const std::filesystem::path& path, const DatasetShard& shard) {
  shard.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write("GFSH", 4);
  le::put_u32(out, kShardVersion);
  le::put_u64(out, shard.size());
  le::put_u64(out, shard.feature_dim());
  for (Eigen::Index i = 0; i < shard.features.rows(); ++i)
    for (Eigen::Index j = 0; j < shard.features.cols(); ++j) le::put_f64(out, shard.features(i, j));
  for (Eigen::Index i = 0; i < shard.labels.size(); ++i) le::put_f64(out, shard.labels(i));
  if (!out) throw IoError("write failed for " + path.string());
}

DatasetShard read_shard_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  le::expect_magic(in, "GFSH", path.string());
  if (le::get_u32(in) != kShardVersion) throw IoError(path.string() + ": unsupported version");
  const auto n = static_cast<Eigen::Index>(le::get_u64(in));
  const auto m = static_cast<Eigen::Index>(le::get_u64(in));
  DatasetShard shard;
  shard.features.resize(n, m);
  shard.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) shard.features(i, j) = le::get_f64(in);
  for (Eigen::Index i = 0; i < n; ++i) shard.labels(i) = le::get_f64(in);
  shard.validate();
  return shard;
}

void write_shard_csv(const std::filesystem::path& path, const DatasetShard& shard) {
  shard.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (Eigen::Index j = 0; j < shard.features.cols(); ++j) out << 'x' << j << ',';
  out << "y\n";
  for (Eigen::Index i = 0; i < shard.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < shard.features.cols(); ++j)
      out << format17(shard.features(i, j)) << ',';
    out << format17(shard.labels(i)) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

DatasetShard read_shard_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": missing header");
  const auto cols = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ',') + 1);
  if (cols < 2) throw IoError(path.string() + ": need at least one feature column and y");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError(path.string() + ": unparsable cell '" + cell + "'");
      }
    }
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw IoError(path.string() + ": ragged row");
    rows.push_back(std::move(row));
  }
  DatasetShard shard;
  const auto n = static_cast<Eigen::Index>(rows.size());
  shard.features.resize(n, cols - 1);
  shard.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j + 1 < cols; ++j) shard.features(i, j) = r[static_cast<std::size_t>(j)];
    shard.labels(i) = r.back();
  }
  shard.validate();
  return shard;
}

}  // namespace gifair
