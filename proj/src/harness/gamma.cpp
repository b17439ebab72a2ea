#include "gifair/harness/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gifair {

namespace {

const QuadraticObjective& as_quadratic(const ObjectivePtr& obj) {
  return dynamic_cast<const QuadraticObjective&>(*obj);
}

std::vector<double> weights_from_ranks(const RankVector& ranks, const FairnessConfig& config) {
  std::vector<double> w(ranks.size());
  for (std::size_t k = 0; k < ranks.size(); ++k) w[k] = local_weight(k, ranks, config);
  return w;
}

RankVector ranks_at(const ParamVector& theta, std::span<const ObjectivePtr> objectives,
                    const FederationSpec& fed) {
  return rank_coefficients(group_losses(client_losses(theta, objectives), fed), fed);
}

struct Candidate {
  ParamVector theta;
  double h = 0.0;
  bool consistent = false;
};

RankVector ranks_from_order(const std::vector<std::size_t>& order, const FederationSpec& fed) {
  // order[0] has the largest loss.
  const std::size_t d = order.size();
  std::vector<double> fake(d);
  for (std::size_t pos = 0; pos < d; ++pos) fake[order[pos]] = static_cast<double>(d - pos);
  return rank_coefficients(fake, fed);
}

// Backtracking descent on f with gradient g. Returns the final iterate.
template <class F, class G>
ParamVector descend(ParamVector x, F&& f, G&& g, const GammaOptions& opt) {
  double step = 1.0;
  double fx = f(x);
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    const ParamVector grad = g(x);
    const double gn = grad.squaredNorm();
    if (gn <= opt.grad_tolerance) break;
    step = std::min(step * 2.0, 1e6);
    bool moved = false;
    while (step > 1e-16) {
      ParamVector trial = x - step * grad;
      const double ft = f(trial);
      if (std::isfinite(ft) && ft <= fx - 0.5 * step * gn) {
        x = std::move(trial);
        fx = ft;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return x;
}

// Euclidean projection onto the permutohedron spanned by the strict rank
// vector (d-1, d-3, ..., 1-d): sort, subtract, pool adjacent violators of a
// non-increasing fit, add back.
std::vector<double> project_onto_rank_hull(const std::vector<double>& z) {
  const std::size_t d = z.size();
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return z[a] > z[b]; });
  std::vector<double> sums, fit;
  std::vector<std::size_t> sizes;
  for (std::size_t j = 0; j < d; ++j) {
    const double c = static_cast<double>(d - 1) - 2.0 * static_cast<double>(j);
    sums.push_back(z[order[j]] - c);
    sizes.push_back(1);
    while (sums.size() > 1 && sums[sums.size() - 2] / static_cast<double>(sizes[sizes.size() - 2]) <
                                  sums.back() / static_cast<double>(sizes.back())) {
      sums[sums.size() - 2] += sums.back();
      sizes[sizes.size() - 2] += sizes.back();
      sums.pop_back();
      sizes.pop_back();
    }
  }
  for (std::size_t b = 0; b < sums.size(); ++b)
    fit.insert(fit.end(), sizes[b], sums[b] / static_cast<double>(sizes[b]));
  std::vector<double> x(d);
  for (std::size_t j = 0; j < d; ++j) x[order[j]] = z[order[j]] - fit[j];
  return x;
}

struct DualOutcome {
  Candidate best;
  double lower_bound = -std::numeric_limits<double>::infinity();
};

// The pairwise penalty is the largest sum_i rho_i L_i over strict rank
// vectors rho, so H is the pointwise maximum of sum_k (p_k + lambda
// rho_{s_k} / |A_{s_k}|) F_k over rho in their convex hull. Projected ascent
// on the dual g(rho) = min_theta of that sum (gradient lambda L(theta(rho)))
// yields primal iterates theta(rho) that reach minimizers lying on group-loss
// ties, plus a lower bound on H* when every F_k is convex and the inner
// minimization is exact.
template <class Inner>
DualOutcome dual_ascent(std::span<const ObjectivePtr> objectives, const FairnessConfig& config,
                        Inner&& inner, ParamVector theta, std::size_t iterations) {
  const auto& fed = config.federation();
  const double lambda = config.lambda();
  const std::size_t d = fed.num_groups();
  DualOutcome out;
  out.best.h = std::numeric_limits<double>::infinity();

  struct Point {
    std::vector<double> rho;
    ParamVector theta;
    double g = 0.0;
    std::vector<double> losses;
  };
  auto evaluate = [&](std::vector<double> rho, const ParamVector& warm) {
    Point pt;
    std::vector<double> cw(objectives.size());
    for (std::size_t k = 0; k < cw.size(); ++k) {
      const std::size_t i = fed.group_of(k);
      cw[k] = fed.weight(k) + lambda * rho[i] / static_cast<double>(fed.group_size(i));
    }
    pt.theta = inner(cw, warm);
    const auto f = client_losses(pt.theta, objectives);
    pt.g = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) pt.g += cw[k] * f[k];
    pt.losses = group_losses(f, fed);
    pt.rho = std::move(rho);
    const double h = global_objective_direct(pt.theta, objectives, config);
    if (h < out.best.h) {
      out.best.theta = pt.theta;
      out.best.h = h;
      out.best.consistent = false;
    }
    out.lower_bound = std::max(out.lower_bound, pt.g);
    return pt;
  };

  Point cur = evaluate(std::vector<double>(d, 0.0), theta);
  double step = 1.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    if (out.best.h - out.lower_bound <= 1e-13 * (1.0 + std::abs(out.best.h))) break;
    bool moved = false;
    while (step > 1e-14) {
      std::vector<double> z(d);
      for (std::size_t i = 0; i < d; ++i) z[i] = cur.rho[i] + step * lambda * cur.losses[i];
      std::vector<double> rho = project_onto_rank_hull(z);
      double lin = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double delta = rho[i] - cur.rho[i];
        lin += lambda * cur.losses[i] * delta;
        sq += delta * delta;
      }
      if (sq == 0.0) break;
      Point next = evaluate(std::move(rho), cur.theta);
      if (next.g >= cur.g + lin - sq / (2.0 * step)) {
        cur = std::move(next);
        moved = true;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return out;
}

}  // namespace

bool all_quadratic(std::span<const ObjectivePtr> objectives) {
  return std::all_of(objectives.begin(), objectives.end(), [](const ObjectivePtr& o) {
    return dynamic_cast<const QuadraticObjective*>(o.get()) != nullptr;
  });
}

ParamVector weighted_quadratic_minimizer(std::span<const ObjectivePtr> objectives,
                                         std::span<const double> client_weights) {
  if (objectives.empty() || objectives.size() != client_weights.size())
    throw std::invalid_argument("weighted_quadratic_minimizer: one weight per objective");
  const auto n = static_cast<Eigen::Index>(objectives.front()->dim());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  ParamVector rhs = ParamVector::Zero(n);
  for (std::size_t k = 0; k < objectives.size(); ++k) {
    const auto& q = as_quadratic(objectives[k]);
    M += client_weights[k] * q.hessian();
    rhs += client_weights[k] * (q.hessian() * q.minimizer());
  }
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("weighted normal equations are not positive definite");
  return llt.solve(rhs);
}

GammaDiagnostics gamma_diagnostics(std::span<const ObjectivePtr> objectives,
                                   const FairnessConfig& config,
                                   const std::optional<ParamVector>& start,
                                   const GammaOptions& options) {
  const auto& fed = config.federation();
  if (objectives.size() != fed.num_clients())
    throw std::invalid_argument("gamma_diagnostics: expected one objective per client");
  GammaDiagnostics out;
  std::vector<double> f_star(objectives.size());

  if (all_quadratic(objectives)) {
    out.exact = true;
    // The solver takes p_k w_k as its weights.
    auto solve = [&](const RankVector& ranks) {
      Candidate c;
      auto w = weights_from_ranks(ranks, config);
      for (std::size_t k = 0; k < w.size(); ++k) w[k] *= fed.weight(k);
      c.theta = weighted_quadratic_minimizer(objectives, w);
      c.h = global_objective_direct(c.theta, objectives, config);
      c.consistent = ranks_at(c.theta, objectives, fed) == ranks;
      return c;
    };
    std::vector<Candidate> candidates;
    candidates.push_back(solve(RankVector(fed.num_clients(), 0)));
    const std::size_t d = fed.num_groups();
    if (config.lambda() > 0.0) {
      if (d <= 6) {
        std::vector<std::size_t> order(d);
        std::iota(order.begin(), order.end(), std::size_t{0});
        do {
          candidates.push_back(solve(ranks_from_order(order, fed)));
        } while (std::next_permutation(order.begin(), order.end()));
      } else {
        RankVector r = ranks_at(candidates.front().theta, objectives, fed);
        for (int it = 0; it < 100; ++it) {
          Candidate c = solve(r);
          candidates.push_back(c);
          if (c.consistent) break;
          r = ranks_at(c.theta, objectives, fed);
        }
      }
    }
    // Every candidate bounds H* from above; an interior minimizer is one of
    // them, a minimizer on a group-loss tie is reached by the dual iterates.
    auto inner = [&](const std::vector<double>& w, const ParamVector&) {
      return weighted_quadratic_minimizer(objectives, w);
    };
    const auto dual = dual_ascent(objectives, config, inner, candidates.front().theta,
                                  config.lambda() > 0.0 ? options.dual_iterations : 0);
    candidates.push_back(dual.best);
    const Candidate& pick = *std::min_element(
        candidates.begin(), candidates.end(),
        [](const Candidate& a, const Candidate& b) { return a.h < b.h; });
    out.theta_star = pick.theta;
    out.h_star = pick.h;
    out.ranks_consistent = pick.consistent;
    out.duality_gap = std::max(0.0, out.h_star - dual.lower_bound);
    for (std::size_t k = 0; k < objectives.size(); ++k)
      f_star[k] = as_quadratic(objectives[k]).min_value();
  } else {
    const auto dim = static_cast<Eigen::Index>(objectives.front()->dim());
    ParamVector x0 = start.value_or(ParamVector::Zero(dim));
    out.theta_star = descend(
        x0, [&](const ParamVector& t) { return global_objective_direct(t, objectives, config); },
        [&](const ParamVector& t) { return global_gradient(t, objectives, config); }, options);
    out.h_star = global_objective_direct(out.theta_star, objectives, config);
    out.ranks_consistent = true;
    auto inner = [&](const std::vector<double>& w, const ParamVector& warm) {
      return descend(
          warm,
          [&](const ParamVector& t) {
            double v = 0.0;
            for (std::size_t k = 0; k < w.size(); ++k) v += w[k] * objectives[k]->value(t);
            return v;
          },
          [&](const ParamVector& t) {
            ParamVector g = ParamVector::Zero(t.size());
            for (std::size_t k = 0; k < w.size(); ++k) g += w[k] * objectives[k]->gradient(t);
            return g;
          },
          options);
    };
    const auto dual = dual_ascent(objectives, config, inner, out.theta_star,
                                  config.lambda() > 0.0 ? options.inexact_dual_iterations : 0);
    if (dual.best.h < out.h_star) {
      out.theta_star = dual.best.theta;
      out.h_star = dual.best.h;
      out.ranks_consistent = false;
    }
    // Inexact inner solves overestimate the dual, so no bound is reported.
    out.duality_gap = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < objectives.size(); ++k) {
      const Objective& obj = *objectives[k];
      const ParamVector xk = descend(
          out.theta_star, [&](const ParamVector& t) { return obj.value(t); },
          [&](const ParamVector& t) { return obj.gradient(t); }, options);
      f_star[k] = obj.value(xk);
    }
  }

  const RankVector ranks = ranks_at(out.theta_star, objectives, fed);
  out.client_optima.resize(objectives.size());
  // Both sums run over the same terms p_k (H* - H_k*) in the same order, so
  // monotone rounding keeps |Gamma_K| <= Gamma_max exactly.
  double signed_sum = 0.0;
  double spread = 0.0;
  for (std::size_t k = 0; k < objectives.size(); ++k) {
    out.client_optima[k] = local_weight(k, ranks, config) * f_star[k];
    const double term = fed.weight(k) * (out.h_star - out.client_optima[k]);
    signed_sum += term;
    spread += std::abs(term);
  }
  out.gamma_k = signed_sum;
  out.gamma_max = spread;
  if (out.gamma_max < std::abs(out.gamma_k))
    throw std::runtime_error("gamma_diagnostics: Gamma_max=" + std::to_string(out.gamma_max) +
                             " < |Gamma_K|=" + std::to_string(std::abs(out.gamma_k)));
  return out;
}

}  // namespace gifair
