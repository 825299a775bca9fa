#include "trajopt/types.hpp"

#include <cstring>

#include "trajopt/rng.hpp"

namespace trajopt {

std::size_t AugmentedInputHash::operator()(const AugmentedInput& p) const {
  std::uint64_t h = siphash24(0x9AE16A3B2F90404FULL, 0xC3A5C85C97CB3127ULL,
                              p.x.data(), sizeof(double) * p.x.size());
  std::uint64_t s = static_cast<std::uint64_t>(p.seed);
  return static_cast<std::size_t>(
      siphash24(h, h ^ 0x9E3779B97F4A7C15ULL, &s, sizeof(s)));
}

}  // namespace trajopt
