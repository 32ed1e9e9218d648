#include "mspf/rng.hpp"

namespace mspf {
namespace {

constexpr std::uint64_t mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t combine(std::uint64_t h, std::uint64_t v) noexcept {
  return mix(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

}  // namespace

std::uint64_t hash_stream_key(const StreamKey& key) noexcept {
  std::uint64_t h = mix(key.seed + 0x6a09e667f3bcc909ULL);
  h = combine(h, static_cast<std::uint64_t>(key.purpose));
  h = combine(h, key.individual);
  h = combine(h, key.scale);
  h = combine(h, key.particle);
  h = combine(h, key.step);
  return h;
}

}  // namespace mspf
