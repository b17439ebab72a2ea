#pragma once

#include <cstddef>
#include <span>

#include "gifair/model/param.hpp"

namespace gifair {

/// One client's local data: N_k rows of features and N_k labels.
struct DatasetShard {
  FeatureMatrix features;
  Eigen::VectorXd labels;

  std::size_t size() const noexcept { return static_cast<std::size_t>(labels.size()); }
  std::size_t feature_dim() const noexcept {
    return static_cast<std::size_t>(features.cols());
  }

  /// Throws std::invalid_argument unless N >= 1 and rows/labels align.
  void validate() const;

  /// Rows in the order given.
  DatasetShard subset(std::span<const std::size_t> rows) const;
};

}  // namespace gifair
