#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace lss {

/// Philox4x32-10 block function (Salmon et al., SC'11). Pure: the output is
/// a function of (counter, key) only, which is what makes chains replayable
/// from any step and lets replicas run in any order.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Maps 64 random bits to a double in the open interval (0, 1).
double bits_to_open_unit(std::uint64_t bits);

/// Standard normal quantile, evaluated through the inverse complementary
/// error function.
double normal_quantile(double u);

/// Counter-based noise source keyed by (seed, stream). The i-th Gaussian of
/// step n is a pure function of (seed, stream, n, i).
class NoiseKey {
 public:
  NoiseKey() = default;
  NoiseKey(std::uint64_t seed, std::uint32_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const { return seed_; }
  std::uint32_t stream() const { return stream_; }

  double uniform(std::uint64_t step, std::uint32_t index) const;
  double normal(std::uint64_t step, std::uint32_t index) const;

  /// Fills out[i] with normal(step, i) for every i.
  void normals(std::uint64_t step, std::span<double> out) const;

 private:
  std::array<std::uint32_t, 4> block(std::uint64_t step, std::uint32_t block_index) const;

  std::uint64_t seed_ = 0;
  std::uint32_t stream_ = 0;
};

/// Sequential draws from a NoiseKey, for setup work such as sampling test
/// points. Not used inside the chain kernels.
class RandomStream {
 public:
  explicit RandomStream(NoiseKey key) : key_(key) {}
  RandomStream(std::uint64_t seed, std::uint32_t stream) : key_(seed, stream) {}

  double uniform() { return key_.uniform(next_++, 0); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return key_.normal(next_++, 0); }

 private:
  NoiseKey key_;
  std::uint64_t next_ = 0;
};

}  // namespace lss
