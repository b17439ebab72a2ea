#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "gifair/fairness/fairness.hpp"

namespace gifair {

/// Non-i.i.d.-ness diagnostics
///
///   Gamma_K   = H* - sum_k p_k H_k*
///   Gamma_max = sum_k p_k |H* - H_k*|
///
/// with H_k(theta) = (1 + lambda r_k / (p_k |A_{s_k}|)) F_k(theta), the ranks
/// fixed at those of the H minimizer, so that H_k* = w_k F_k*.
struct GammaDiagnostics {
  double gamma_k = 0.0;
  double gamma_max = 0.0;
  double h_star = 0.0;
  ParamVector theta_star;
  /// H_k* per client.
  std::vector<double> client_optima;
  /// Solved in closed form (all objectives quadratic) rather than by descent.
  bool exact = false;
  /// The ranks at theta_star equal the ranks its weights were solved with.
  bool ranks_consistent = false;
  /// h_star minus the best dual lower bound found, for quadratic ensembles;
  /// NaN otherwise.
  double duality_gap = std::numeric_limits<double>::quiet_NaN();
};

struct GammaOptions {
  /// Gradient-descent budget and stopping rule for non-quadratic objectives.
  std::size_t max_iterations = 20000;
  double grad_tolerance = 1e-12;
  /// Projected dual-ascent steps over the rank hull (quadratic ensembles).
  std::size_t dual_iterations = 5000;
  /// The same for other objectives, where every step runs a descent.
  std::size_t inexact_dual_iterations = 100;
};

/// Quadratic ensembles: every strict group ordering (d <= 6; otherwise a
/// fixed-point iteration from the unweighted solution) and the all-tied
/// ordering give a weighted normal-equation solve, and projected ascent on
/// the dual over the convex hull of rank vectors covers minimizers that sit
/// on group-loss ties; H* is the smallest H over all of these. Other
/// objectives: backtracking gradient descent on H from `start` (or the
/// origin) refined by a short dual ascent with descent inner solves, and
/// descent on every F_k, flagged inexact.
///
/// Throws std::runtime_error if Gamma_max < |Gamma_K|.
GammaDiagnostics gamma_diagnostics(std::span<const ObjectivePtr> objectives,
                                   const FairnessConfig& config,
                                   const std::optional<ParamVector>& start = std::nullopt,
                                   const GammaOptions& options = {});

/// Minimizer of sum_k p_k w_k F_k for quadratic F_k and fixed positive
/// weights w_k: (sum p_k w_k A_k)^{-1} sum p_k w_k A_k theta*_k.
ParamVector weighted_quadratic_minimizer(std::span<const ObjectivePtr> objectives,
                                         std::span<const double> client_weights);

/// True when every objective is a QuadraticObjective.
bool all_quadratic(std::span<const ObjectivePtr> objectives);

}  // namespace gifair
