#pragma once

#include <cstdint>
#include <random>

namespace flatcyl {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Key for stream `index` of purpose `tag` under `seed`.
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ tag) ^ index);
}

// Counter-based uniform in (0,1): no state, so any sample can be regenerated alone.
inline double hashed_uniform(std::uint64_t key, std::uint64_t counter) {
  const std::uint64_t h = splitmix64(key ^ splitmix64(counter));
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

using engine = std::mt19937_64;

inline engine make_engine(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  return engine(stream_key(seed, tag, index));
}

// Uniform in (0,1), never 0 or 1.
inline double open_uniform(engine& g) { return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53; }

// Stream tags, one per experiment family.
namespace tag {
constexpr std::uint64_t flux = 1;
constexpr std::uint64_t transit = 2;
constexpr std::uint64_t riccati = 3;
constexpr std::uint64_t tower = 4;
constexpr std::uint64_t orbit = 5;
constexpr std::uint64_t neck = 6;
constexpr std::uint64_t clairaut = 7;
constexpr std::uint64_t pairs = 8;
}  // namespace tag

}  // namespace flatcyl
