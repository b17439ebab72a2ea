#include "gifair/model/rng.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace gifair {

Rng derive_stream(std::uint64_t master_seed, StreamTag tag, std::uint64_t a, std::uint64_t b,
                  std::uint64_t c) {
  const std::array<std::uint64_t, 5> parts{master_seed, static_cast<std::uint64_t>(tag), a, b, c};
  std::array<std::uint32_t, 10> words{};
  for (std::size_t i = 0; i < parts.size(); ++i) {
    words[2 * i] = static_cast<std::uint32_t>(parts[i] & 0xffffffffULL);
    words[2 * i + 1] = static_cast<std::uint32_t>(parts[i] >> 32);
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

std::vector<std::size_t> draw_batch(Rng& rng, std::size_t n, std::size_t batch_size) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (batch_size >= n) return idx;
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < batch_size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(batch_size);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace gifair
