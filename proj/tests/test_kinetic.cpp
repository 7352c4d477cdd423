#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "phonon/kinetic.hpp"
#include "phonon/rng.hpp"

using namespace phonon;

namespace {

std::vector<double> random_positive(const MomentumGrid<1>& grid, std::uint64_t seed,
                                    double lo = 0.3, double hi = 1.7) {
  std::vector<double> W(grid.size());
  std::uint64_t key = rng_key(seed);
  for (std::size_t i = 0; i < W.size(); ++i) W[i] = lo + (hi - lo) * rng_uniform(key, i);
  return W;
}

double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("equilibrium states") {
  auto flat = Dispersion<1>::custom_elastic({{{0}, 1.0}});
  MomentumGrid<1> grid(16);

  SECTION("omega = 1 gives W = 1, and beta scales inversely") {
    auto W1 = equilibrium_wigner(1.0, grid, flat);
    for (double v : W1.values) CHECK(v == 1.0);
    auto W2 = equilibrium_wigner(2.0, grid, flat);
    for (std::size_t i = 0; i < W1.values.size(); ++i)
      CHECK(W2.values[i] == Catch::Approx(0.5 * W1.values[i]));
  }

  SECTION("acoustic chain is rejected: zero mode") {
    CHECK_THROWS_AS(equilibrium_wigner(1.0, grid, Dispersion<1>::fpu_chain()), domain_error);
  }
}

TEST_CASE("entropy quadrature") {
  SECTION("constants") {
    MomentumGrid<1> grid(16);
    WignerState<1> ones(grid, 1.0);
    CHECK(entropy(ones).value == Catch::Approx(0.0).margin(1e-15));
    WignerState<1> es(grid, std::exp(1.0));
    CHECK(entropy(es).value == Catch::Approx(1.0).epsilon(1e-13));
  }

  SECTION("zero entries flag a divergent entropy") {
    MomentumGrid<1> grid(8);
    WignerState<1> W(grid, 1.0);
    W.values[3] = 0.0;
    auto s = entropy(W);
    CHECK_FALSE(s.finite);
    CHECK(std::isinf(s.value));
  }

  SECTION("acoustic thermal entropy has a closed form, zero mode excluded") {
    // omega = sqrt(2)|sin(pi k)| and prod_{j=1}^{N-1} sin(pi j/N) = N/2^{N-1}
    // give S_N = (log 2)/2 (1 - 1/N) - log(N)/N for W = 1/omega off the zero
    // mode; the log singularity makes plain quadrature refinement converge
    // only at O(log N / N), so the closed form is the oracle here.
    auto fpu = Dispersion<1>::fpu_chain();
    auto S_of = [&](int N) {
      MomentumGrid<1> grid(N);
      double s = 0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        double w = fpu.eval(grid.point(i));
        if (w < 1e-12) continue;  // exclude the zero mode
        s += std::log(1.0 / w);
      }
      return s * grid.weight();
    };
    auto closed = [](double N) {
      return 0.5 * std::log(2.0) * (1.0 - 1.0 / N) - std::log(N) / N;
    };
    CHECK(S_of(128) == Catch::Approx(closed(128)).margin(1e-12));
    CHECK(S_of(4096) == Catch::Approx(closed(4096)).margin(1e-12));
    // and the refinement gap is the predicted ~0.0385, far above 1e-4
    CHECK(std::abs(S_of(4096) - S_of(128)) ==
          Catch::Approx(closed(4096) - closed(128)).margin(1e-12));
  }

  SECTION("smooth optical dispersion: N = 128 already matches the N = 4096 oracle") {
    auto opt = Dispersion<1>::optical_nearest_neighbor(1.0);
    auto S_of = [&](int N) {
      MomentumGrid<1> grid(N);
      return entropy(equilibrium_wigner(1.0, grid, opt)).value;
    };
    CHECK(std::abs(S_of(128) - S_of(4096)) <= 1e-4);
  }
}

TEST_CASE("entropy production") {
  auto opt = Dispersion<1>::optical_nearest_neighbor(1.0);
  MomentumGrid<1> grid(64);
  auto kernel = build_kernel_1d(grid, opt);

  SECTION("equilibrium produces nothing") {
    auto Wb = equilibrium_wigner(1.0, grid, opt);
    CHECK(entropy_production(kernel, Wb.values) <= 1e-15);
  }

  SECTION("any positive state produces nonnegatively") {
    for (int trial = 0; trial < 20; ++trial) {
      auto W = random_positive(grid, 40 + trial);
      REQUIRE(entropy_production(kernel, W) >= 0.0);
    }
  }

  SECTION("sigma_S equals the entropy slope along the flow") {
    auto W0 = random_positive(grid, 5);
    auto traj = solve_homogeneous(kernel, WignerState<1>(grid, W0), 8.0, 0.01, {});
    REQUIRE(traj.violations.empty());
    int checked = 0;
    for (std::size_t i = 10; i + 1 < traj.times.size() && checked < 10; i += 60) {
      double sigma_mid = 0.5 * (entropy_production(kernel, traj.states[i]) +
                                entropy_production(kernel, traj.states[i + 1]));
      if (sigma_mid <= 1e-8) continue;
      double slope = (traj.entropy_at(i + 1) - traj.entropy_at(i)) /
                     (traj.times[i + 1] - traj.times[i]);
      REQUIRE(std::abs(slope - sigma_mid) <= 1e-3 * sigma_mid);
      ++checked;
    }
    REQUIRE(checked >= 5);
  }
}

TEST_CASE("homogeneous stepping") {
  auto opt = Dispersion<1>::optical_nearest_neighbor(1.0);
  MomentumGrid<1> grid(64);
  auto kernel = build_kernel_1d(grid, opt);

  SECTION("equilibrium is a fixed point of the step") {
    auto Wb = equilibrium_wigner(1.0, grid, opt);
    auto W1 = step_homogeneous(kernel, Wb, 0.1);
    for (std::size_t i = 0; i < Wb.values.size(); ++i)
      REQUIRE(std::abs(W1.values[i] - Wb.values[i]) <= 1e-12 * Wb.values[i]);
  }

  SECTION("the zero state stays zero") {
    WignerState<1> W(grid, 0.0);
    auto W1 = step_homogeneous(kernel, W, 0.1);
    for (double v : W1.values) CHECK(v == 0.0);
  }

  SECTION("fourth-order convergence against a fine reference") {
    WignerState<1> W0(grid, random_positive(grid, 8));
    const double T = 1.6;
    auto advance = [&](int nsteps) {
      WignerState<1> W = W0;
      for (int s = 0; s < nsteps; ++s) W = step_homogeneous(kernel, W, T / nsteps);
      return W;
    };
    auto ref = advance(1024);
    double e1 = rel_l2(advance(16).values, ref.values);
    double e2 = rel_l2(advance(32).values, ref.values);
    CHECK(e1 / e2 >= 14.0);  // dt^4: ratio 16 up to higher-order terms
    CHECK(e1 / e2 <= 26.0);
  }

  SECTION("stiff rates: clamping floors at zero, otherwise a stiffness error") {
    KernelBuildOptions big;
    big.rate_scale = 1e9;
    auto stiff = build_kernel_1d(grid, opt, 1e-12, big);
    WignerState<1> W0(grid, random_positive(grid, 9, 0.01, 2.0));
    CHECK_THROWS_AS(step_homogeneous(stiff, W0, 1e6, {false, 12}), numerical_error);
    auto clamped = step_homogeneous(stiff, W0, 1e6, {true, 12});
    for (double v : clamped.values) REQUIRE(v >= 0.0);
  }
}

TEST_CASE("homogeneous relaxation") {
  auto opt = Dispersion<1>::optical_nearest_neighbor(1.0);
  MomentumGrid<1> grid(64);
  auto kernel = build_kernel_1d(grid, opt);

  SECTION("equilibrium initial data: constant trajectory") {
    auto Wb = equilibrium_wigner(0.7, grid, opt);
    auto traj = solve_homogeneous(kernel, Wb, 5.0, 0.05, {});
    REQUIRE(traj.violations.empty());
    for (const auto& st : traj.states)
      for (std::size_t i = 0; i < st.size(); ++i)
        REQUIRE(std::abs(st[i] - Wb.values[i]) <= 1e-10 * Wb.values[i]);
  }

  SECTION("random data relaxes onto the two-parameter family") {
    auto W0 = random_positive(grid, 1234);
    auto traj = solve_homogeneous(kernel, WignerState<1>(grid, W0), 80.0, 0.05, {});
    REQUIRE(traj.violations.empty());
    auto fit = solve_stationary_moments(grid, kernel.omega, traj.number.front(),
                                        traj.energy.front());
    std::vector<double> target(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
      target[i] = 1.0 / (fit.a + fit.c * kernel.omega[i]);
    CHECK(rel_l2(traj.states.back(), target) <= 1e-2);

    // entropy grows strictly until the state is essentially relaxed
    for (std::size_t i = 1; i < traj.times.size(); ++i) {
      if (rel_l2(traj.states[i], target) > 0.05)
        REQUIRE(traj.entropy_at(i) > traj.entropy_at(i - 1));
    }
  }

  SECTION("moment solve recovers thermal parameters") {
    auto Wb = equilibrium_wigner(1.3, grid, opt);
    double e = 0, n = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      e += kernel.omega[i] * Wb.values[i];
      n += Wb.values[i];
    }
    e *= grid.weight();
    n *= grid.weight();
    auto fit = solve_stationary_moments(grid, kernel.omega, n, e);
    CHECK(fit.a == Catch::Approx(0.0).margin(1e-9));
    CHECK(fit.c == Catch::Approx(1.3).epsilon(1e-10));
  }
}
