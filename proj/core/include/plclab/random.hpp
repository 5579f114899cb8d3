// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace plclab {

/// splitmix64 finalizer; used to decorrelate derived seeds.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

/// Derives an independent seed from a master seed and a label
/// (FNV-1a of the label mixed with the master).
std::uint64_t derive_seed(std::uint64_t master, std::string_view label) noexcept;
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0) noexcept;

/// Standard normal source with a platform-independent bit stream.
/// std::normal_distribution is implementation-defined, so the transform is
/// done here (Marsaglia polar method over mt19937_64).
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double uniform();  ///< in [0, 1), 53-bit resolution
  double normal();
  std::uint64_t index(std::uint64_t bound);  ///< uniform in [0, bound)

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace plclab
