#pragma once

#include <cstdint>

namespace gkp {

/// Counter-based stream keyed by (seed, trial, site). Two streams with the same
/// key produce the same sequence no matter which thread draws them, which is
/// what keeps batch results independent of the worker count.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t trial, std::uint64_t site) noexcept;

  std::uint64_t next() noexcept;
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Site identifiers used by the factory.
namespace site {
inline constexpr std::uint64_t kCounts = 1;
inline constexpr std::uint64_t kConditionedCounts = 2;
inline constexpr std::uint64_t kHomodyne = 3;
}  // namespace site

}  // namespace gkp
