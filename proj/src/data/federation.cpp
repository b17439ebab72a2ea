#include "gifair/data/federation.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace gifair {

std::vector<double> compute_weights(std::span<const std::size_t> sample_counts) {
  if (sample_counts.empty()) throw std::invalid_argument("compute_weights: no clients");
  std::size_t total = 0;
  for (std::size_t k = 0; k < sample_counts.size(); ++k) {
    if (sample_counts[k] == 0)
      throw std::invalid_argument("compute_weights: client " + std::to_string(k) +
                                  " has zero samples");
    total += sample_counts[k];
  }
  std::vector<double> p(sample_counts.size());
  const auto denom = static_cast<double>(total);
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = static_cast<double>(sample_counts[k]) / denom;
  return p;
}

FederationSpec FederationSpec::create(std::vector<std::size_t> groups, std::size_t num_groups,
                                      std::vector<std::size_t> sample_counts) {
  const std::size_t k = groups.size();
  if (sample_counts.size() != k)
    throw std::invalid_argument("federation: group list and sample counts differ in length");
  if (num_groups < 2 || num_groups > k)
    throw std::invalid_argument("federation: need 2 <= d <= K (d=" + std::to_string(num_groups) +
                                ", K=" + std::to_string(k) + ")");
  FederationSpec spec;
  spec.members_.resize(num_groups);
  for (std::size_t c = 0; c < k; ++c) {
    if (groups[c] >= num_groups)
      throw std::invalid_argument("federation: client " + std::to_string(c) +
                                  " has group index out of range");
    spec.members_[groups[c]].push_back(c);
  }
  for (std::size_t i = 0; i < num_groups; ++i)
    if (spec.members_[i].empty())
      throw std::invalid_argument("federation: group " + std::to_string(i) + " has no clients");
  spec.weights_ = compute_weights(sample_counts);
  spec.groups_ = std::move(groups);
  spec.counts_ = std::move(sample_counts);
  return spec;
}

FederationSpec FederationSpec::from_group_sizes(std::span<const std::size_t> group_sizes,
                                                std::vector<std::size_t> sample_counts) {
  std::vector<std::size_t> groups;
  for (std::size_t i = 0; i < group_sizes.size(); ++i) {
    if (group_sizes[i] == 0)
      throw std::invalid_argument("federation: group " + std::to_string(i) + " has no clients");
    groups.insert(groups.end(), group_sizes[i], i);
  }
  return create(std::move(groups), group_sizes.size(), std::move(sample_counts));
}

}  // namespace gifair
