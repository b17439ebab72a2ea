#include "gifair/model/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "gifair/model/rng.hpp"

namespace gifair {

namespace {

ParamVector probe_center(const Objective& objective) {
  if (const auto* q = dynamic_cast<const QuadraticObjective*>(&objective)) return q->minimizer();
  return ParamVector::Zero(static_cast<Eigen::Index>(objective.dim()));
}

ParamVector unit_direction(Rng& rng, Eigen::Index dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ParamVector u(dim);
  double norm = 0.0;
  while (norm == 0.0) {
    for (Eigen::Index i = 0; i < dim; ++i) u(i) = normal(rng);
    norm = u.norm();
  }
  return u / norm;
}

// True when two probes are too close for a stable difference quotient.
bool coincident(const ParamVector& a, const ParamVector& b) {
  return (a - b).norm() <= 1e-12 * (1.0 + std::max(a.norm(), b.norm()));
}

}  // namespace

CurvatureConstants estimate_constants(const Objective& objective, double probe_radius,
                                      std::size_t n_probes, std::uint64_t rng_seed,
                                      std::size_t batch_size) {
  if (n_probes < 2) throw std::invalid_argument("estimate_constants: need at least 2 probes");
  if (!(probe_radius >= 0.0))
    throw std::invalid_argument("estimate_constants: probe radius must be nonnegative");
  if (batch_size == 0) throw std::invalid_argument("estimate_constants: batch_size must be >= 1");

  const auto dim = static_cast<Eigen::Index>(objective.dim());
  Rng rng = derive_stream(rng_seed, StreamTag::probe);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const ParamVector center = probe_center(objective);

  std::vector<ParamVector> probes;
  std::vector<ParamVector> grads;
  probes.reserve(n_probes);
  grads.reserve(n_probes);
  for (std::size_t i = 0; i < n_probes; ++i) {
    const double r = probe_radius * std::pow(unit(rng), 1.0 / static_cast<double>(dim));
    probes.push_back(center + r * unit_direction(rng, dim));
    grads.push_back(objective.gradient(probes.back()));
  }

  CurvatureConstants out;
  if (const auto& exact = objective.exact_constants()) {
    out.L = exact->L;
    out.mu = exact->mu;
    out.lower_bound = false;
  } else {
    double lip = 0.0;
    for (std::size_t i = 0; i < n_probes; ++i) {
      for (std::size_t j = i + 1; j < n_probes; ++j) {
        if (coincident(probes[i], probes[j])) continue;
        lip = std::max(lip, (grads[i] - grads[j]).norm() / (probes[i] - probes[j]).norm());
      }
      // Short local pair, which also covers a zero-radius probe region.
      const double h = 1e-4 * (1.0 + probes[i].norm());
      const ParamVector nearby = probes[i] + h * unit_direction(rng, dim);
      if (!coincident(probes[i], nearby))
        lip = std::max(lip, (objective.gradient(nearby) - grads[i]).norm() /
                                (nearby - probes[i]).norm());
    }
    out.mu = objective.strong_convexity_floor();
    out.L = std::max(lip, out.mu);
    out.lower_bound = true;
  }

  constexpr std::size_t kDraws = 32;
  const std::size_t n = objective.num_samples();
  for (std::size_t i = 0; i < n_probes; ++i) {
    double var = 0.0;
    double second = 0.0;
    for (std::size_t s = 0; s < kDraws; ++s) {
      const auto batch = draw_batch(rng, n, batch_size);
      const ParamVector g = objective.stochastic_gradient(probes[i], batch);
      var += (g - grads[i]).squaredNorm();
      second += g.squaredNorm();
    }
    out.sigma_sq = std::max(out.sigma_sq, var / kDraws);
    out.G_sq = std::max(out.G_sq, second / kDraws);
  }
  return out;
}

}  // namespace gifair
