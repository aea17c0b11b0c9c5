#include "gkp/rng.hpp"

namespace gkp {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

Stream::Stream(std::uint64_t seed, std::uint64_t trial, std::uint64_t site) noexcept
    : key_(mix(mix(mix(seed + kGolden) ^ (trial * 0xd1b54a32d192ed03ULL)) ^
               (site * 0xabc98388fb8fac03ULL))) {}

std::uint64_t Stream::next() noexcept {
  ++counter_;
  return mix(key_ + counter_ * kGolden);
}

double Stream::uniform() noexcept { return double(next() >> 11) * 0x1.0p-53; }

}  // namespace gkp
