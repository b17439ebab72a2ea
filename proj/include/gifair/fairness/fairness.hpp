#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gifair/data/federation.hpp"
#include "gifair/model/objective.hpp"

namespace gifair {

/// L_i, the mean client loss of each group (length d).
using GroupLossVector = std::vector<double>;

/// r_k, one signed rank coefficient per client (length K).
using RankVector = std::vector<int>;

/// Fairness multiplier together with the federation it was validated
/// against. Construction enforces 0 <= lambda < lambda_max(federation).
class FairnessConfig {
 public:
  FairnessConfig(double lambda, FederationSpec federation);

  double lambda() const noexcept { return lambda_; }
  const FederationSpec& federation() const noexcept { return federation_; }

 private:
  double lambda_;
  FederationSpec federation_;
};

/// L_i = mean of F_k over the clients of group i. Rejects NaN, negative
/// entries and a length other than K.
GroupLossVector group_losses(std::span<const double> client_losses,
                             const FederationSpec& federation);

/// r_k = sum over groups j != s_k of sign(L_{s_k} - L_j), with sign(0) = 0.
/// When all group losses are distinct, r_k is in {-d+1, -d+3, ..., d-1}.
RankVector rank_coefficients(std::span<const double> group_losses,
                             const FederationSpec& federation);

/// min_k p_k |A_{s_k}| / (d - 1); always strictly positive.
double lambda_max(const FederationSpec& federation);

/// The round-frozen product lambda r_k / (p_k |A_{s_k}|) the server
/// broadcasts to client k.
double weight_product(std::size_t k, std::span<const int> ranks, const FairnessConfig& config);

/// 1 + weight_product(k, ...); strictly positive because lambda < lambda_max.
double local_weight(std::size_t k, std::span<const int> ranks, const FairnessConfig& config);

/// sum_{i<j} |L_i - L_j|.
double pairwise_penalty(std::span<const double> group_losses);

/// H from client losses directly: sum_k p_k F_k + lambda * pairwise_penalty.
double objective_direct_from_losses(std::span<const double> client_losses,
                                    const FairnessConfig& config);

/// H from client losses through the reweighted form
/// sum_k p_k (1 + lambda r_k / (p_k |A_{s_k}|)) F_k, ranks taken at the same
/// losses.
double objective_weighted_from_losses(std::span<const double> client_losses,
                                      const FairnessConfig& config);

/// Per-client losses F_k(theta).
std::vector<double> client_losses(const ParamVector& theta,
                                  std::span<const ObjectivePtr> objectives);

double global_objective_direct(const ParamVector& theta,
                               std::span<const ObjectivePtr> objectives,
                               const FairnessConfig& config);

double global_objective_weighted(const ParamVector& theta,
                                 std::span<const ObjectivePtr> objectives,
                                 const FairnessConfig& config);

/// grad H at theta with the ranks evaluated at theta (the nonsmooth rank
/// term is treated as locally constant).
ParamVector global_gradient(const ParamVector& theta, std::span<const ObjectivePtr> objectives,
                            const FairnessConfig& config);

}  // namespace gifair
