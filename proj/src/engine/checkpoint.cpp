#include "gifair/engine/checkpoint.hpp"

#include <fstream>
#include <string>

#include "../common/little_endian.hpp"
#include "gifair/errors.hpp"

namespace gifair {

namespace {

constexpr std::uint32_t kCheckpointVersion = 1;
constexpr std::uint64_t kMaxCount = std::uint64_t{1} << 32;

std::uint64_t get_count(std::istream& in, const std::string& what) {
  const std::uint64_t v = le::get_u64(in);
  if (v > kMaxCount) throw IoError(what + ": implausible size field");
  return v;
}

void put_vector(std::ostream& out, const ParamVector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) le::put_f64(out, v[i]);
}

ParamVector get_vector(std::istream& in, std::uint64_t dim) {
  ParamVector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = le::get_f64(in);
  return v;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const auto& s = checkpoint.state;
  const auto dim = static_cast<std::uint64_t>(s.theta_bar.size());
  if (s.ranks.size() != s.cached_client_losses.size())
    throw std::invalid_argument("checkpoint: ranks and client losses disagree in length");
  if (checkpoint.personal) {
    if (checkpoint.personal->size() != s.ranks.size())
      throw std::invalid_argument("checkpoint: expected one personal model per client");
    for (const auto& v : *checkpoint.personal)
      if (static_cast<std::uint64_t>(v.size()) != dim)
        throw std::invalid_argument("checkpoint: personal model dimension mismatch");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write("GFCK", 4);
  le::put_u32(out, kCheckpointVersion);
  le::put_u64(out, s.round);
  le::put_u64(out, s.global_step);
  le::put_u64(out, dim);
  put_vector(out, s.theta_bar);
  le::put_u64(out, s.ranks.size());
  for (int r : s.ranks) le::put_i32(out, r);
  for (double v : s.cached_client_losses) le::put_f64(out, v);
  le::put_u64(out, s.cached_group_losses.size());
  for (double v : s.cached_group_losses) le::put_f64(out, v);
  out.put(checkpoint.personal ? 1 : 0);
  if (checkpoint.personal)
    for (const auto& v : *checkpoint.personal) put_vector(out, v);
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string name = path.string();
  le::expect_magic(in, "GFCK", name);
  if (le::get_u32(in) != kCheckpointVersion) throw IoError(name + ": unsupported version");
  Checkpoint cp;
  auto& s = cp.state;
  s.round = le::get_u64(in);
  s.global_step = le::get_u64(in);
  const std::uint64_t dim = get_count(in, name);
  s.theta_bar = get_vector(in, dim);
  const std::uint64_t K = get_count(in, name);
  s.ranks.resize(K);
  for (auto& r : s.ranks) r = le::get_i32(in);
  s.cached_client_losses.resize(K);
  for (auto& v : s.cached_client_losses) v = le::get_f64(in);
  const std::uint64_t d = get_count(in, name);
  s.cached_group_losses.resize(d);
  for (auto& v : s.cached_group_losses) v = le::get_f64(in);
  const int flag = in.get();
  if (!in || (flag != 0 && flag != 1)) throw IoError(name + ": bad personal-state flag");
  if (flag == 1) {
    cp.personal.emplace();
    cp.personal->reserve(K);
    for (std::uint64_t k = 0; k < K; ++k) cp.personal->push_back(get_vector(in, dim));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw IoError(name + ": trailing bytes");
  return cp;
}

}  // namespace gifair
