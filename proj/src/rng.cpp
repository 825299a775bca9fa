#include "trajopt/rng.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace trajopt {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int b) {
  return (x << b) | (x >> (64 - b));
}

inline void sipround(std::uint64_t& v0, std::uint64_t& v1, std::uint64_t& v2,
                     std::uint64_t& v3) {
  v0 += v1;
  v1 = rotl(v1, 13);
  v1 ^= v0;
  v0 = rotl(v0, 32);
  v2 += v3;
  v3 = rotl(v3, 16);
  v3 ^= v2;
  v0 += v3;
  v3 = rotl(v3, 21);
  v3 ^= v0;
  v2 += v1;
  v1 = rotl(v1, 17);
  v1 ^= v2;
  v2 = rotl(v2, 32);
}

// splitmix64 output function; the stream below evaluates it at key + i*phi.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Fixed project-wide SipHash key halves for derivations.
constexpr std::uint64_t kDeriveK0 = 0x7472616A6F707400ULL;  // arbitrary constants
constexpr std::uint64_t kDeriveK1 = 0x63726E6770747300ULL;

}  // namespace

std::uint64_t siphash24(std::uint64_t k0, std::uint64_t k1, const void* data,
                        std::size_t len) {
  const unsigned char* in = static_cast<const unsigned char*>(data);
  std::uint64_t v0 = 0x736F6D6570736575ULL ^ k0;
  std::uint64_t v1 = 0x646F72616E646F6DULL ^ k1;
  std::uint64_t v2 = 0x6C7967656E657261ULL ^ k0;
  std::uint64_t v3 = 0x7465646279746573ULL ^ k1;

  const std::size_t end = len - (len % 8);
  for (std::size_t i = 0; i < end; i += 8) {
    std::uint64_t m;
    std::memcpy(&m, in + i, 8);
    v3 ^= m;
    sipround(v0, v1, v2, v3);
    sipround(v0, v1, v2, v3);
    v0 ^= m;
  }

  std::uint64_t b = static_cast<std::uint64_t>(len) << 56;
  for (std::size_t i = 0; i < len % 8; ++i) {
    b |= static_cast<std::uint64_t>(in[end + i]) << (8 * i);
  }
  v3 ^= b;
  sipround(v0, v1, v2, v3);
  sipround(v0, v1, v2, v3);
  v0 ^= b;

  v2 ^= 0xFF;
  sipround(v0, v1, v2, v3);
  sipround(v0, v1, v2, v3);
  sipround(v0, v1, v2, v3);
  sipround(v0, v1, v2, v3);
  return v0 ^ v1 ^ v2 ^ v3;
}

std::uint64_t Rng::next_u64() {
  std::uint64_t z = key_ + (++counter_) * kGolden;
  return mix64(z);
}

double Rng::uniform01() {
  // 53 high bits, shifted into the open interval.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  const double u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
  const std::uint64_t threshold = (0ULL - n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

Rng Rng::substream(std::string_view tag) const {
  return Rng(siphash24(kDeriveK0 ^ key_, kDeriveK1 + key_, tag.data(),
                       tag.size()));
}

Rng Rng::substream(std::uint64_t a, std::uint64_t b) const {
  std::uint64_t buf[2] = {a, b};
  return Rng(siphash24(kDeriveK0 ^ key_, kDeriveK1 + key_, buf, sizeof(buf)));
}

namespace {

// Quantile of Binomial(n, p) at u, for p <= 0.5. Left-tail CDF walk with the
// usual pmf ratio recurrence.
int binomial_quantile_low(double u, int n, double p) {
  const double q = 1.0 - p;
  double pmf = std::exp(static_cast<double>(n) * std::log1p(-p));
  double cdf = pmf;
  int k = 0;
  const double odds = p / q;
  while (u > cdf && k < n) {
    ++k;
    pmf *= odds * static_cast<double>(n - k + 1) / static_cast<double>(k);
    cdf += pmf;
  }
  return k;
}

}  // namespace

int binomial(Rng& rng, int n, double p) {
  if (n < 0) throw std::invalid_argument("binomial: n must be nonnegative");
  if (n == 0 || p <= 0.0) {
    (void)rng.next_u64();  // keep stream consumption fixed at one value
    return 0;
  }
  if (p >= 1.0) {
    (void)rng.next_u64();
    return n;
  }
  const double u = rng.uniform01();
  if (p <= 0.5) return binomial_quantile_low(u, n, p);
  // Tail symmetry keeps the starting pmf within normal double range.
  return n - binomial_quantile_low(u, n, 1.0 - p);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t a, std::uint64_t b) {
  unsigned char buf[16 + 64] = {0};
  std::memcpy(buf, &a, 8);
  std::memcpy(buf + 8, &b, 8);
  const std::size_t taglen = tag.size() < 64 ? tag.size() : 64;
  std::memcpy(buf + 16, tag.data(), taglen);
  return siphash24(kDeriveK0 ^ master, kDeriveK1 + master, buf, 16 + taglen);
}

}  // namespace trajopt
