#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace gifair {

using Rng = std::mt19937_64;

/// Purposes a stream can be derived for. Distinct tags never share state.
enum class StreamTag : std::uint64_t {
  sampling = 1,
  local_update = 2,
  personalization = 3,
  data = 4,
  probe = 5,
  split = 6,
  init = 7,
};

/// Deterministic child stream of (master_seed, tag, a, b, c). Derivation goes
/// through std::seed_seq, whose mixing algorithm is fixed by the standard.
Rng derive_stream(std::uint64_t master_seed, StreamTag tag, std::uint64_t a = 0,
                  std::uint64_t b = 0, std::uint64_t c = 0);

/// Minibatch of min(batch_size, n) distinct indices in ascending order.
/// When batch_size >= n the full range is returned and the stream is not
/// advanced.
std::vector<std::size_t> draw_batch(Rng& rng, std::size_t n, std::size_t batch_size);

}  // namespace gifair
