#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gifair {

/// p_k = N_k / sum_j N_j. Throws std::invalid_argument on an empty list or a
/// zero count.
std::vector<double> compute_weights(std::span<const std::size_t> sample_counts);

/// The client population: K clients, each in one of d groups, with sample
/// counts N_k and weights p_k. Group indices are 0-based here (group i of d
/// is index i-1 in the usual 1-based notation).
class FederationSpec {
 public:
  /// Validates 2 <= d <= K, every group non-empty, every N_k >= 1.
  static FederationSpec create(std::vector<std::size_t> groups, std::size_t num_groups,
                               std::vector<std::size_t> sample_counts);

  /// Contiguous groups: the first group_sizes[0] clients form group 0, etc.
  static FederationSpec from_group_sizes(std::span<const std::size_t> group_sizes,
                                         std::vector<std::size_t> sample_counts);

  std::size_t num_clients() const noexcept { return groups_.size(); }
  std::size_t num_groups() const noexcept { return members_.size(); }

  std::size_t group_of(std::size_t k) const { return groups_.at(k); }
  double weight(std::size_t k) const { return weights_.at(k); }
  std::size_t sample_count(std::size_t k) const { return counts_.at(k); }
  std::size_t group_size(std::size_t i) const { return members_.at(i).size(); }
  const std::vector<std::size_t>& members(std::size_t i) const { return members_.at(i); }

  std::span<const std::size_t> groups() const noexcept { return groups_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const std::size_t> sample_counts() const noexcept { return counts_; }

 private:
  FederationSpec() = default;

  std::vector<std::size_t> groups_;
  std::vector<std::size_t> counts_;
  std::vector<double> weights_;
  std::vector<std::vector<std::size_t>> members_;
};

}  // namespace gifair
