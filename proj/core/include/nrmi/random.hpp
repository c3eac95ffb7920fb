#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace nrmi {

/// Philox4x32-10 counter-based generator.
///
/// The key is the master seed and the upper half of the 128-bit counter is a
/// stream id, so every (seed, stream) pair addresses an independent sequence
/// that can be created on any worker without coordination. Satisfies
/// UniformRandomBitGenerator with 64-bit output.
class Philox {
 public:
  using result_type = std::uint64_t;

  explicit Philox(std::uint64_t seed = 0, std::uint64_t stream = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int cursor_ = 4;
};

using Rng = Philox;

/// SplitMix64 finalizer; used to fold structured keys into stream ids.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Stream id for a tuple of integer keys (order matters).
std::uint64_t stream_id(std::initializer_list<std::uint64_t> keys) noexcept;

/// Uniform on [0, 1) with 53 random bits.
double uniform01(Rng& rng) noexcept;

/// Uniform on the open interval (0, 1).
double uniform_open01(Rng& rng) noexcept;

/// Standard exponential variate.
double standard_exponential(Rng& rng) noexcept;

/// Standard normal variate (Box-Muller, no cached state).
double standard_normal(Rng& rng) noexcept;

/// Gamma(shape, rate) variate; shape > 0, rate > 0.
double gamma_variate(double shape, double rate, Rng& rng);

}  // namespace nrmi
