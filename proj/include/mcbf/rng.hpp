// SPDX-License-Identifier: Apache-2.0
//
// Counter-based Philox4x32-10 generator. Every random quantity in the library
// is a pure function of (seed, stream, index), so draws are reproducible
// across platforms and independent of evaluation order.
#pragma once

#include <array>
#include <complex>
#include <cstdint>

namespace mcbf {

using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxBlock philox4x32_10(PhiloxBlock counter, PhiloxKey key) noexcept;

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint32_t stream = 0) noexcept;

  /// Two uniforms in (0, 1) from the block at counter (index, stream).
  std::array<double, 2> uniform2(std::uint64_t index) const noexcept;
  double uniform(std::uint64_t index) const noexcept { return uniform2(index)[0]; }
  /// Circular complex Gaussian with E|z|^2 = 1.
  std::complex<double> complex_normal(std::uint64_t index) const noexcept;

 private:
  PhiloxKey key_;
  std::uint32_t stream_;
};

}  // namespace mcbf
