#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace jetcalc {

/// Philox4x32-10 counter-based generator. Every (key, counter) pair maps to an
/// independent 128-bit block, so sample i of a run can be drawn without
/// touching samples 0..i-1.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

/// Stream of standard complex Gaussians for one sample: key = master seed,
/// counter = (sample index, draw index).
class SampleStream {
 public:
  SampleStream(std::uint64_t seed, std::uint64_t sample)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, sample_(sample) {}

  std::uint64_t draws() const { return draw_; }

  /// E|w|^2 = 1, rotation invariant (Box-Muller on two open-interval uniforms).
  std::complex<double> complex_normal() {
    const auto out = Philox4x32::block({static_cast<std::uint32_t>(sample_), static_cast<std::uint32_t>(sample_ >> 32),
                                        static_cast<std::uint32_t>(draw_), static_cast<std::uint32_t>(draw_ >> 32)},
                                       key_);
    ++draw_;
    const double u1 = to_unit((std::uint64_t{out[0]} << 32) | out[1]);
    const double u2 = to_unit((std::uint64_t{out[2]} << 32) | out[3]);
    const double radius = std::sqrt(-std::log(u1));  // sqrt(-2 log u) / sqrt(2)
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

 private:
  static double to_unit(std::uint64_t x) { return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53; }

  Philox4x32::Key key_;
  std::uint64_t sample_;
  std::uint64_t draw_ = 0;
};

}  // namespace jetcalc
