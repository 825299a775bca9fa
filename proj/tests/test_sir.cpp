#include <doctest.h>

#include <vector>

#include "trajopt/rng.hpp"
#include "trajopt/sir.hpp"

using trajopt::Rng;
using trajopt::SirConfig;
using trajopt::Trajectory;
using trajopt::simulate_sir;

namespace {

void check_invariants(const Trajectory& t, const SirConfig& c) {
  const auto& S = t.series("S");
  const auto& I = t.series("I");
  const auto& R = t.series("R");
  REQUIRE(S.size() == static_cast<std::size_t>(c.horizon + 1));
  bool absorbed = false;
  for (std::size_t k = 0; k < S.size(); ++k) {
    CHECK(S[k] + I[k] + R[k] == static_cast<double>(c.population));
    CHECK(S[k] >= 0.0);
    CHECK(I[k] >= 0.0);
    CHECK(R[k] >= 0.0);
    if (k > 0) {
      CHECK(S[k] <= S[k - 1]);
      CHECK(R[k] >= R[k - 1]);
      if (absorbed) {
        CHECK(I[k] == 0.0);
        CHECK(S[k] == S[k - 1]);
      }
    }
    if (I[k] == 0.0) absorbed = true;
  }
}

}  // namespace

TEST_CASE("conservation and monotonicity on the default population") {
  SirConfig c;
  c.beta = 0.04;
  c.gamma = 0.425;
  for (int seed = 0; seed < 20; ++seed) {
    c.seed = seed;
    check_invariants(simulate_sir(c), c);
  }
}

TEST_CASE("random configurations keep every invariant") {
  Rng rng(99);
  for (int rep = 0; rep < 100; ++rep) {
    SirConfig c;
    c.beta = rng.uniform01();
    c.gamma = rng.uniform01();
    c.seed = static_cast<std::int64_t>(rng.below(1u << 20));
    check_invariants(simulate_sir(c), c);
  }
}

TEST_CASE("zero infection rate freezes S") {
  SirConfig c;
  c.beta = 0.0;
  c.gamma = 0.3;
  c.seed = 7;
  const Trajectory t = simulate_sir(c);
  const auto& S = t.series("S");
  const auto& I = t.series("I");
  for (std::size_t k = 0; k < S.size(); ++k) CHECK(S[k] == 1000.0);
  for (std::size_t k = 1; k < I.size(); ++k) CHECK(I[k] <= I[k - 1]);
}

TEST_CASE("zero recovery rate keeps R identically zero") {
  SirConfig c;
  c.beta = 0.8;
  c.gamma = 0.0;
  c.seed = 11;
  const Trajectory t = simulate_sir(c);
  for (double r : t.series("R")) CHECK(r == 0.0);
}

TEST_CASE("identical configs give bit-identical trajectories") {
  SirConfig c;
  c.beta = 0.7;
  c.gamma = 0.2;
  c.seed = 50;
  const Trajectory a = simulate_sir(c);
  const Trajectory b = simulate_sir(c);
  CHECK(a.outputs == b.outputs);

  c.seed = 51;
  const Trajectory d = simulate_sir(c);
  CHECK(a.outputs != d.outputs);
}

TEST_CASE("invalid configurations are rejected") {
  SirConfig c;
  c.s0 = 999;  // breaks S0+I0+R0 = N
  CHECK_THROWS_AS(simulate_sir(c), trajopt::ConfigError);
  c = SirConfig{};
  c.beta = -0.1;
  CHECK_THROWS_AS(simulate_sir(c), trajopt::ConfigError);
  c = SirConfig{};
  c.horizon = 0;
  CHECK_THROWS_AS(simulate_sir(c), trajopt::ConfigError);
}

TEST_CASE("parallel batch equals the serial reference bitwise") {
  std::vector<SirConfig> configs;
  Rng rng(123);
  for (int i = 0; i < 64; ++i) {
    SirConfig c;
    c.beta = rng.uniform01();
    c.gamma = rng.uniform01();
    c.seed = static_cast<std::int64_t>(i);
    configs.push_back(c);
  }
  const auto par = trajopt::simulate_sir_batch(configs);
  const auto ser = trajopt::serial::simulate_sir_batch(configs);
  REQUIRE(par.size() == ser.size());
  for (std::size_t i = 0; i < par.size(); ++i) {
    CHECK(par[i].outputs == ser[i].outputs);
  }
}
