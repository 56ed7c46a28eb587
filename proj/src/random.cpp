#include "lss/random.hpp"

#include <cmath>

#include <boost/math/special_functions/erf.hpp>

namespace lss {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

double bits_to_open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

double normal_quantile(double u) {
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

std::array<std::uint32_t, 4> NoiseKey::block(std::uint64_t step, std::uint32_t block_index) const {
  return philox4x32({static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
                     stream_, block_index},
                    {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
}

double NoiseKey::uniform(std::uint64_t step, std::uint32_t index) const {
  const auto r = block(step, index / 2);
  const int off = static_cast<int>(index % 2) * 2;
  const std::uint64_t bits = (static_cast<std::uint64_t>(r[off]) << 32) | r[off + 1];
  return bits_to_open_unit(bits);
}

double NoiseKey::normal(std::uint64_t step, std::uint32_t index) const {
  return normal_quantile(uniform(step, index));
}

void NoiseKey::normals(std::uint64_t step, std::span<double> out) const {
  for (std::size_t i = 0; i < out.size(); i += 2) {
    const auto r = block(step, static_cast<std::uint32_t>(i / 2));
    out[i] = normal_quantile(bits_to_open_unit((static_cast<std::uint64_t>(r[0]) << 32) | r[1]));
    if (i + 1 < out.size()) {
      out[i + 1] =
          normal_quantile(bits_to_open_unit((static_cast<std::uint64_t>(r[2]) << 32) | r[3]));
    }
  }
}

}  // namespace lss
