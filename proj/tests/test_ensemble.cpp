#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "phonon/ensemble.hpp"

using namespace phonon;

namespace {

std::vector<ComplexField> gibbs_fields(const EnsembleSpec& spec, const Dispersion<1>& d) {
  std::vector<ComplexField> fields;
  fields.reserve(spec.realizations);
  for (long m = 0; m < spec.realizations; ++m)
    fields.push_back(sample_harmonic_gibbs(spec, d, m));
  return fields;
}

}  // namespace

TEST_CASE("harmonic Gibbs sampling and the spectrum estimator") {
  auto opt = Dispersion<1>::optical_nearest_neighbor(1.0);
  EnsembleSpec spec(1.0, 10000, 17, 256);
  auto fields = gibbs_fields(spec, opt);
  auto est = estimate_power_spectrum(fields);

  SECTION("per-mode spectrum matches 1/(beta omega) within 3 sigma") {
    for (std::size_t i = 0; i < est.state.grid.size(); ++i) {
      double w = opt.eval(est.state.grid.point(i));
      REQUIRE(std::abs(est.state.values[i] - 1.0 / w) <= 3.0 * est.stderr_[i]);
    }
  }

  SECTION("<a a> vanishes within 3 sigma") {
    const std::size_t L = 256;
    for (std::size_t j1 : {std::size_t(3), std::size_t(17), std::size_t(100)}) {
      std::size_t j2 = (L - j1) % L;  // a(k) a(-k), the tightest coupled pair
      cplx mean(0);
      double sumsq = 0;
      for (const auto& f : fields) {
        cplx v = f.a[j1] * f.a[j2];
        mean += v;
        sumsq += std::norm(v);
      }
      double M = static_cast<double>(fields.size());
      mean /= M;
      double stderr_est = std::sqrt(sumsq / M / M);
      REQUIRE(std::abs(mean) <= 3.0 * stderr_est);
    }
  }

  SECTION("cross-mode occupation covariance vanishes") {
    double bound = 4.0 / std::sqrt(static_cast<double>(spec.realizations));
    for (auto [i1, i2] : {std::pair<std::size_t, std::size_t>{10, 200},
                          {31, 32},
                          {128, 129},
                          {5, 251}}) {
      REQUIRE(std::abs(spectrum_covariance(fields, i1, i2)) <= bound);
    }
  }

  SECTION("spectrum is exactly invariant under free evolution") {
    std::vector<ComplexField> evolved;
    for (const auto& f : fields) evolved.push_back(free_evolve(f, 3.7));
    auto est2 = estimate_power_spectrum(evolved);
    for (std::size_t i = 0; i < est.state.grid.size(); ++i)
      REQUIRE(std::abs(est2.state.values[i] - est.state.values[i]) <=
              1e-13 * est.state.values[i]);
  }
}

TEST_CASE("sampler edge cases") {
  auto opt = Dispersion<1>::optical_nearest_neighbor(1.0);

  SECTION("variance vanishes in the zero-temperature limit") {
    EnsembleSpec cold(1e12, 1, 3, 64);
    auto f = sample_harmonic_gibbs(cold, opt);
    for (const auto& z : f.a) CHECK(std::abs(z) <= 1e-4);
  }

  SECTION("acoustic dispersion is rejected") {
    EnsembleSpec spec(1.0, 1, 3, 64);
    CHECK_THROWS_AS(sample_harmonic_gibbs(spec, Dispersion<1>::fpu_chain()),
                    domain_error);
  }

  SECTION("deterministic in (seed, realization)") {
    EnsembleSpec spec(1.0, 2, 99, 64);
    auto a = sample_harmonic_gibbs(spec, opt, 1);
    auto b = sample_harmonic_gibbs(spec, opt, 1);
    CHECK(a.a == b.a);
    auto c = sample_harmonic_gibbs(spec, opt, 0);
    CHECK(a.a != c.a);
  }

  SECTION("estimator rejects mixed sizes and empty input") {
    CHECK_THROWS_AS(estimate_power_spectrum({}), domain_error);
    std::vector<ComplexField> mixed{ComplexField(8, opt), ComplexField(16, opt)};
    CHECK_THROWS_AS(estimate_power_spectrum(mixed), domain_error);
  }

  SECTION("all-zero fields give the zero spectrum") {
    std::vector<ComplexField> zeros(3, ComplexField(16, opt));
    auto est = estimate_power_spectrum(zeros);
    for (double v : est.state.values) CHECK(v == 0.0);
  }

  SECTION("covariance preconditions") {
    EnsembleSpec spec(1.0, 4, 5, 16);
    auto fields = gibbs_fields(spec, opt);
    CHECK_THROWS_AS(spectrum_covariance(fields, 3, 3), domain_error);
    std::vector<ComplexField> copies(4, fields[0]);
    CHECK(spectrum_covariance(copies, 3, 7) == 0.0);
  }
}

TEST_CASE("microscopic ensemble runs") {
  auto opt = Dispersion<1>::optical_nearest_neighbor(1.0);

  SECTION("harmonic dynamics preserves mode occupations") {
    EnsembleSpec spec(1.0, 200, 21, 64);
    auto res = run_microscopic_experiment(spec, opt, 0.0, Potential::OnsiteQuartic,
                                          {1.0, 2.5}, 0.02);
    for (const auto& snap : res.snapshots) {
      for (std::size_t i = 0; i < snap.state.grid.size(); ++i) {
        double w = opt.eval(snap.state.grid.point(i));
        REQUIRE(std::abs(snap.state.values[i] - 1.0 / w) <=
                3.0 * snap.stderr_[i] + 1e-4);
      }
    }
    // harmonic Verlet energy error stays a bounded O(dt^2) oscillation
    CHECK(res.max_energy_drift <= 1e-3);
  }

  SECTION("weak anharmonicity keeps the Gibbs spectrum stationary") {
    EnsembleSpec spec(1.0, 300, 22, 64);
    auto res = run_microscopic_experiment(spec, opt, 0.1, Potential::OnsiteQuartic,
                                          {2.0, 5.0}, 0.02);
    // O(sqrt(lambda)) correction band on top of the 3 sigma statistical bars
    double band = 0.12;
    for (const auto& snap : res.snapshots) {
      for (std::size_t i = 0; i < snap.state.grid.size(); ++i) {
        double w = opt.eval(snap.state.grid.point(i));
        REQUIRE(std::abs(snap.state.values[i] - 1.0 / w) <=
                3.0 * snap.stderr_[i] + band / w);
      }
    }
  }

  SECTION("relaxation toward the stationary family from a distorted spectrum") {
    const std::size_t L = 64;
    MomentumGrid<1> grid(L);
    std::vector<double> W0(L);
    for (std::size_t i = 0; i < L; ++i) {
      double k = grid.point(i)[0];
      W0[i] = (1.0 + 0.8 * std::cos(2.0 * pi * k)) / opt.eval(k);
    }
    EnsembleSpec spec(1.0, 200, 23, L);
    auto res = run_microscopic_experiment(spec, opt, 1.0, Potential::OnsiteQuartic,
                                          {1.0, 60.0}, 0.05, &W0);
    // residual of 1/W against span{1, omega}: large for the injected
    // distortion, shrinking as the spectrum drifts to equilibrium form
    auto family_residual = [&](const SpectrumEstimate& est) {
      double s1 = L, sw = 0, sww = 0, sp = 0, swp = 0;
      for (std::size_t i = 0; i < L; ++i) {
        double w = opt.eval(grid.point(i));
        double psi = 1.0 / est.state.values[i];
        sw += w;
        sww += w * w;
        sp += psi;
        swp += w * psi;
      }
      double det = s1 * sww - sw * sw;
      double a = (sww * sp - sw * swp) / det;
      double c = (s1 * swp - sw * sp) / det;
      double num = 0, den = 0;
      for (std::size_t i = 0; i < L; ++i) {
        double w = opt.eval(grid.point(i));
        double psi = 1.0 / est.state.values[i];
        num += (psi - a - c * w) * (psi - a - c * w);
        den += psi * psi;
      }
      return std::sqrt(num / den);
    };
    double r0 = family_residual(res.snapshots[0]);
    double r1 = family_residual(res.snapshots[1]);
    CHECK(r1 < 0.5 * r0);
  }

  SECTION("integrator instability aborts with a diagnostic") {
    EnsembleSpec spec(0.5, 4, 31, 32);
    CHECK_THROWS_WITH(run_microscopic_experiment(spec, opt, 1.0, Potential::OnsiteQuartic,
                                                 {50.0}, 2.0),
                      Catch::Matchers::ContainsSubstring("drift"));
  }
}
