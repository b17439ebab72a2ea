#pragma once

#include <cstddef>
#include <cstdint>

#include "gifair/model/objective.hpp"

namespace gifair {

/// Probes `n_probes` points uniformly in a ball of radius `probe_radius`
/// around the objective's minimizer (quadratics) or the origin.
///
/// Quadratics report exact L and mu from their spectrum. Otherwise L is the
/// largest gradient-difference ratio over probe pairs (plus a short local
/// pair at each probe), mu is the objective's known floor, and the result is
/// flagged as a lower bound. sigma_sq and G_sq are the largest per-probe
/// means of ||g_B - g||^2 and ||g_B||^2 over random minibatches of
/// `batch_size`. Coincident probes are skipped.
CurvatureConstants estimate_constants(const Objective& objective, double probe_radius,
                                      std::size_t n_probes, std::uint64_t rng_seed,
                                      std::size_t batch_size = 1);

}  // namespace gifair
