#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "phonon/chain.hpp"
#include "phonon/normal_modes.hpp"
#include "phonon/rng.hpp"

using namespace phonon;

namespace {

ChainState random_state(std::size_t L, const Dispersion<1>& d, double lambda, Potential pot,
                        std::uint64_t seed, double amp = 0.5) {
  ChainState s(L, d, lambda, pot);
  std::uint64_t key = rng_key(seed);
  for (std::size_t x = 0; x < L; ++x) {
    auto [z1, z2] = rng_gauss_pair(key, x);
    s.q[x] = amp * z1;
    s.p[x] = amp * z2;
  }
  return s;
}

}  // namespace

TEST_CASE("hamiltonian") {
  auto opt = Dispersion<1>::optical_nearest_neighbor(1.0);

  SECTION("vacuum state has zero energy") {
    ChainState s(8, opt);
    auto e = hamiltonian(s);
    CHECK(e.harmonic == 0.0);
    CHECK(e.anharmonic == 0.0);
    CHECK(e.total == 0.0);
  }

  SECTION("L = 2 against the direct quadratic-form oracle") {
    CouplingMap<1> a{{{0}, 2.0}, {{1}, -1.0}, {{-1}, -1.0}};
    auto d = Dispersion<1>::custom_elastic(a);
    ChainState s(2, d);
    s.q = {1.0, -1.0};
    // periodic wrap on two sites: alpha_per(0) = 2, alpha_per(1) = -2
    double oracle = 0.5 * (2.0 * (1.0 + 1.0) + (-2.0) * (2.0 * 1.0 * -1.0));
    CHECK(hamiltonian(s).harmonic == Catch::Approx(oracle).epsilon(1e-15));
    CHECK(oracle == 4.0);
  }

  SECTION("single-site excitation, quartic on-site") {
    ChainState s(8, opt, 1.0, Potential::OnsiteQuartic);
    s.q[0] = 1.0;
    CHECK(hamiltonian(s).anharmonic == Catch::Approx(0.25).epsilon(1e-15));
  }

  SECTION("bond potentials against direct sums") {
    double lambda = 0.3;
    for (Potential pot : {Potential::FpuAlphaCubicBond, Potential::FpuBetaQuarticBond}) {
      ChainState s = random_state(16, opt, lambda, pot, 77);
      double g = std::sqrt(lambda), direct = 0;
      for (std::size_t x = 0; x < 16; ++x) {
        double d = s.q[(x + 1) % 16] - s.q[x];
        direct += pot == Potential::FpuAlphaCubicBond ? g / 3.0 * d * d * d
                                                      : g / 4.0 * d * d * d * d;
      }
      CHECK(hamiltonian(s).anharmonic == Catch::Approx(direct).epsilon(1e-13));
    }
  }
}

TEST_CASE("forces are minus the energy gradient") {
  auto opt = Dispersion<1>::optical_nearest_neighbor(1.0);
  const double h = 1e-6;
  for (Potential pot : {Potential::OnsiteQuartic, Potential::FpuAlphaCubicBond,
                        Potential::FpuBetaQuarticBond}) {
    ChainState s = random_state(12, opt, 0.5, pot, 5);
    std::vector<double> f;
    chain_forces(s, f);
    for (std::size_t x = 0; x < s.size(); ++x) {
      ChainState sp = s, sm = s;
      sp.q[x] += h;
      sm.q[x] -= h;
      double fd = -(hamiltonian(sp).total - hamiltonian(sm).total) / (2.0 * h);
      REQUIRE(f[x] == Catch::Approx(fd).margin(1e-7));
    }
  }
}

TEST_CASE("symplectic stepping") {
  auto opt = Dispersion<1>::optical_nearest_neighbor(1.0);

  SECTION("the vacuum is a fixed point") {
    ChainState s(8, opt, 0.2);
    auto s2 = step_symplectic(s, 0.05);
    for (std::size_t x = 0; x < 8; ++x) {
      CHECK(s2.q[x] == 0.0);
      CHECK(s2.p[x] == 0.0);
    }
  }

  SECTION("harmonic dynamics rotates each mode by e^{-i omega t}") {
    const std::size_t L = 16, j0 = 3;
    ComplexField f0(L, opt);
    f0.a[j0] = cplx(1.0, 0.0);
    ChainState s = from_normal_modes(f0);
    const double T = 1.0, dt = 1e-3;
    std::vector<double> scratch(L);
    for (long st = 0; st < std::lround(T / dt); ++st) step_symplectic_inplace(s, dt, scratch);
    ComplexField f = to_normal_modes(s);
    double w = f0.mode_omega(j0);
    cplx expected = std::polar(1.0, -w * T);
    double phase_err = std::abs(std::arg(f.a[j0] / expected));
    CHECK(phase_err <= 1e-4);
    CHECK(std::abs(std::abs(f.a[j0]) - 1.0) <= 1e-5);
  }

  SECTION("energy drift at dt = 0.01 and its dt^2 scaling") {
    ChainState s0 = random_state(32, opt, 0.1, Potential::OnsiteQuartic, 11);
    auto drift = [&](double dt, long steps) {
      ChainState s = s0;
      std::vector<double> scratch(s.size());
      double e0 = hamiltonian(s).total, worst = 0;
      for (long st = 0; st < steps; ++st) {
        step_symplectic_inplace(s, dt, scratch);
        if (st % 50 == 0 || st == steps - 1)
          worst = std::max(worst, std::abs(hamiltonian(s).total - e0) / std::abs(e0));
      }
      return worst;
    };
    double d1 = drift(0.01, 10000);
    CHECK(d1 <= 1e-4);
    double d2 = drift(0.005, 20000);
    CHECK(d1 / d2 >= 2.5);  // second-order integrator: ~4x
    CHECK(d1 / d2 <= 8.0);
  }
}
