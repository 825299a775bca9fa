#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace trajopt {

// SipHash-2-4 with a 64-bit result. Used everywhere a stream key is derived
// from another key plus context, so that distinct derivation tuples give
// statistically independent streams.
std::uint64_t siphash24(std::uint64_t k0, std::uint64_t k1, const void* data,
                        std::size_t len);

// Counter-based pseudorandom stream: output i is a strong 64-bit mix of
// (key, i). Draws depend only on the key and the number of values consumed,
// never on call sites or threads, which is what makes seeds usable as search
// coordinates.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1).
  double uniform01();

  // Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double normal();

  // Uniform integer in [0, n), n >= 1. Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n);

  // Independent stream keyed off this stream's key and a tag. Does not
  // consume from or depend on the position of the parent stream.
  Rng substream(std::string_view tag) const;
  Rng substream(std::uint64_t a, std::uint64_t b = 0) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Binomial(n, p) by exact CDF inversion with one uniform consumed per draw.
// Fixed algorithm so a given stream always yields the same counts.
int binomial(Rng& rng, int n, double p);

// Deterministic run-seed derivation for the experiment harness.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t a, std::uint64_t b);

}  // namespace trajopt
