#pragma once

#include <cstdint>

#include "fasr/tensor.hpp"

namespace fasr {

// Counter-based random stream. A draw at position i is a pure function of
// (seed, stream_id, i), so streams can be split across parallel work units
// without the thread count affecting any value.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id), counter_(0) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t counter() const { return counter_; }

  // Independent stream derived from this one's seed.
  RngStream substream(std::uint64_t stream_id) const {
    return RngStream(seed_, stream_id);
  }

  // Uniform in (0, 1].
  double uniform();

  // Standard normal via Box-Muller; consumes two counter slots.
  double normal();

  void fill_gaussian(Tensor& t);

 private:
  std::uint64_t word(std::uint64_t index) const;

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t counter_;
};

// i.i.d. standard normal tensor; advances the stream counter.
Tensor gaussian(RngStream& rng, const std::vector<std::size_t>& shape);

}  // namespace fasr
