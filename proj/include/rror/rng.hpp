#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>

namespace rror {

// Philox4x32-10 counter-based generator (Salmon et al., Random123). The key is
// the 64-bit seed, the upper half of the 128-bit counter selects an
// independent stream and the lower half counts blocks of four outputs.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t seed = 0, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  // Raw bijection, exposed for the known-answer tests.
  static Block encrypt(Block counter, Key key);

 private:
  Key key_;
  Block counter_;
  Block buffer_{};
  int used_ = 4;
};

// Portable variate generation on top of Philox4x32. Every transform is
// written out here, so draws depend only on (seed, stream) and call order.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0) : gen_(seed, stream) {}

  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  // Box-Muller; the second variate of each pair is cached.
  double normal();
  // Gamma(shape, scale 1) by Marsaglia-Tsang; shape < 1 via the U^{1/a} boost.
  double gamma(double shape);
  std::uint32_t bits() { return gen_(); }

 private:
  Philox4x32 gen_;
  std::optional<double> spare_;
};

}  // namespace rror
