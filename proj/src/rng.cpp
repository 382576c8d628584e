#include "fasr/rng.hpp"

#include <cmath>

namespace fasr {

namespace {

// murmur3 finalizer; full 64-bit avalanche.
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace

std::uint64_t RngStream::word(std::uint64_t index) const {
  std::uint64_t h = mix64(seed_ + kGolden);
  h = mix64(h ^ (stream_id_ + 0xbf58476d1ce4e5b9ULL));
  h = mix64(h ^ (index + kGolden));
  return h;
}

double RngStream::uniform() {
  const std::uint64_t w = word(counter_++);
  // 53-bit mantissa, shifted into (0, 1].
  return static_cast<double>((w >> 11) + 1) * 0x1.0p-53;
}

double RngStream::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

void RngStream::fill_gaussian(Tensor& t) {
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = normal();
}

Tensor gaussian(RngStream& rng, const std::vector<std::size_t>& shape) {
  Tensor t(shape);  // rejects empty/zero shapes
  rng.fill_gaussian(t);
  return t;
}

}  // namespace fasr
