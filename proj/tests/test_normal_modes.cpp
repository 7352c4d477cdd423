#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "phonon/chain.hpp"
#include "phonon/normal_modes.hpp"
#include "phonon/rng.hpp"

using namespace phonon;

namespace {

// direct O(L^2) summation oracle for the mode amplitudes
std::vector<cplx> oracle_modes(const ChainState& s) {
  const std::size_t L = s.size();
  std::vector<cplx> a(L);
  for (std::size_t j = 0; j < L; ++j) {
    double k = wrap_unit(static_cast<double>(j) / L);
    double w = s.dispersion.eval(k);
    cplx qh(0), ph(0);
    for (std::size_t x = 0; x < L; ++x) {
      cplx e = std::polar(1.0, -2.0 * pi * k * static_cast<double>(x));
      qh += s.q[x] * e;
      ph += s.p[x] * e;
    }
    a[j] = (std::sqrt(w) * qh + cplx(0, 1) * ph / std::sqrt(w)) / std::sqrt(2.0);
  }
  return a;
}

}  // namespace

TEST_CASE("transform pair") {
  auto opt = Dispersion<1>::optical_nearest_neighbor(1.0);

  SECTION("vacuum maps to the zero field and back") {
    ChainState s(8, opt);
    ComplexField f = to_normal_modes(s);
    for (const auto& z : f.a) CHECK(std::abs(z) == 0.0);
    ChainState back = from_normal_modes(f);
    for (std::size_t x = 0; x < 8; ++x) {
      CHECK(back.q[x] == 0.0);
      CHECK(back.p[x] == 0.0);
    }
  }

  SECTION("round trip on random states") {
    std::uint64_t key = rng_key(123);
    for (int trial = 0; trial < 100; ++trial) {
      ChainState s(32, opt);
      for (std::size_t x = 0; x < 32; ++x) {
        auto [z1, z2] = rng_gauss_pair(key, 64 * trial + x);
        s.q[x] = z1;
        s.p[x] = z2;
      }
      ChainState back = from_normal_modes(to_normal_modes(s));
      for (std::size_t x = 0; x < 32; ++x) {
        REQUIRE(back.q[x] == Catch::Approx(s.q[x]).margin(1e-10));
        REQUIRE(back.p[x] == Catch::Approx(s.p[x]).margin(1e-10));
      }
    }
  }

  SECTION("harmonic energy identity") {
    std::uint64_t key = rng_key(9);
    ChainState s(24, opt);
    for (std::size_t x = 0; x < 24; ++x) {
      auto [z1, z2] = rng_gauss_pair(key, x);
      s.q[x] = z1;
      s.p[x] = z2;
    }
    double viaModes = harmonic_energy(to_normal_modes(s));
    double direct = hamiltonian(s).harmonic;
    CHECK(viaModes == Catch::Approx(direct).epsilon(1e-10));
  }

  SECTION("single-site excitation against the direct DFT oracle at L = 8") {
    ChainState s(8, opt);
    s.q[0] = 1.0;
    ComplexField f = to_normal_modes(s);
    auto oracle = oracle_modes(s);
    for (std::size_t j = 0; j < 8; ++j) {
      REQUIRE(std::abs(f.a[j] - oracle[j]) <= 1e-12);
      // qhat = 1 on every mode, so |a(k)|^2 = omega(k)/2
      REQUIRE(std::norm(f.a[j]) == Catch::Approx(0.5 * f.mode_omega(j)).epsilon(1e-12));
    }
  }

  SECTION("single mode maps to a cosine profile, L = 8") {
    const std::size_t L = 8, j0 = 2;
    ComplexField f(L, opt);
    f.a[j0] = cplx(1.0, 0.0);
    ChainState s = from_normal_modes(f);
    double k = f.mode_momentum(j0), w = f.mode_omega(j0);
    for (std::size_t x = 0; x < L; ++x) {
      double expect = 2.0 * std::cos(2.0 * pi * k * static_cast<double>(x)) /
                      (static_cast<double>(L) * std::sqrt(2.0 * w));
      REQUIRE(s.q[x] == Catch::Approx(expect).margin(1e-12));
    }
  }

  SECTION("acoustic chain is rejected at the zero mode") {
    auto fpu = Dispersion<1>::fpu_chain();
    ChainState s(8, fpu);
    s.q[1] = 1.0;
    CHECK_THROWS_WITH(to_normal_modes(s), Catch::Matchers::ContainsSubstring("omega0"));
  }

  SECTION("reality guard rejects asymmetric spectra") {
    std::vector<cplx> bad(8, cplx(0));
    bad[1] = cplx(1.0, 0.0);  // no conjugate partner at index 7
    CHECK_THROWS_AS(detail::inverse_real_dft(bad), numerical_error);
  }

  SECTION("non-power-of-two sizes round trip too") {
    ChainState s(12, opt);
    s.q[3] = 0.7;
    s.p[5] = -0.4;
    ChainState back = from_normal_modes(to_normal_modes(s));
    for (std::size_t x = 0; x < 12; ++x) {
      REQUIRE(back.q[x] == Catch::Approx(s.q[x]).margin(1e-12));
      REQUIRE(back.p[x] == Catch::Approx(s.p[x]).margin(1e-12));
    }
  }
}

TEST_CASE("free evolution") {
  auto opt = Dispersion<1>::optical_nearest_neighbor(1.0);
  ComplexField f(16, opt);
  std::uint64_t key = rng_key(4);
  for (std::size_t j = 0; j < 16; ++j) {
    auto [z1, z2] = rng_gauss_pair(key, j);
    f.a[j] = cplx(z1, z2);
  }

  SECTION("t = 0 is the identity") {
    ComplexField g = free_evolve(f, 0.0);
    for (std::size_t j = 0; j < 16; ++j) CHECK(g.a[j] == f.a[j]);
  }

  SECTION("the modulus of every mode is preserved") {
    ComplexField g = free_evolve(f, 7.3);
    for (std::size_t j = 0; j < 16; ++j)
      CHECK(std::abs(g.a[j]) == Catch::Approx(std::abs(f.a[j])).epsilon(1e-13));
  }

  SECTION("semigroup property") {
    ComplexField g1 = free_evolve(free_evolve(f, 0.7), 1.6);
    ComplexField g2 = free_evolve(f, 2.3);
    for (std::size_t j = 0; j < 16; ++j) REQUIRE(std::abs(g1.a[j] - g2.a[j]) <= 1e-12);
  }
}
