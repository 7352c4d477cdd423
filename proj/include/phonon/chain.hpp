#ifndef PHONON_CHAIN_HPP
#define PHONON_CHAIN_HPP

#include <cmath>
#include <vector>

#include "phonon/common.hpp"
#include "phonon/dispersion.hpp"

namespace phonon {

enum class Potential { OnsiteQuartic, FpuAlphaCubicBond, FpuBetaQuarticBond };

/// Microscopic periodic chain: displacements q, momenta p, harmonic
/// couplings from a 1D lattice dispersion, and a weak anharmonicity of
/// strength sqrt(lambda).
struct ChainState {
  std::vector<double> q, p;
  double lambda = 0.0;
  Potential potential = Potential::OnsiteQuartic;
  Dispersion<1> dispersion;

  ChainState(std::size_t L, const Dispersion<1>& disp, double lam = 0.0,
             Potential pot = Potential::OnsiteQuartic)
      : q(L, 0.0), p(L, 0.0), lambda(lam), potential(pot), dispersion(disp) {
    if (L < 2) throw construction_error("chain needs at least two sites");
    if (lam < 0) throw construction_error("anharmonic strength must be nonnegative");
    if (disp.domain() != MomentumDomain::Torus)
      throw domain_error("chain requires a lattice dispersion");
  }

  std::size_t size() const { return q.size(); }
};

struct ChainEnergy {
  double harmonic = 0;
  double anharmonic = 0;
  double total = 0;
};

/// Full energy: sum p^2/2 + (1/2) sum alpha(x-y) q_x q_y plus the quartic
/// on-site term (sqrt(lambda)/4) sum q^4, or the bond analogues with the
/// cubic/3 and quartic/4 coefficient convention.
inline ChainEnergy hamiltonian(const ChainState& s) {
  const std::size_t L = s.size();
  const long Ll = static_cast<long>(L);
  ChainEnergy e;
  for (double p : s.p) e.harmonic += 0.5 * p * p;
  const auto& alpha = s.dispersion.couplings();
  for (std::size_t x = 0; x < L; ++x) {
    double acc = 0;
    for (const auto& [off, a] : alpha) {
      long y = (static_cast<long>(x) + off[0]) % Ll;
      if (y < 0) y += Ll;
      acc += a * s.q[static_cast<std::size_t>(y)];
    }
    e.harmonic += 0.5 * s.q[x] * acc;
  }
  const double g = std::sqrt(s.lambda);
  if (g > 0) {
    switch (s.potential) {
      case Potential::OnsiteQuartic:
        for (double q : s.q) e.anharmonic += 0.25 * g * q * q * q * q;
        break;
      case Potential::FpuAlphaCubicBond:
        for (std::size_t x = 0; x < L; ++x) {
          double d = s.q[(x + 1) % L] - s.q[x];
          e.anharmonic += (g / 3.0) * d * d * d;
        }
        break;
      case Potential::FpuBetaQuarticBond:
        for (std::size_t x = 0; x < L; ++x) {
          double d = s.q[(x + 1) % L] - s.q[x];
          e.anharmonic += 0.25 * g * d * d * d * d;
        }
        break;
    }
  }
  e.total = e.harmonic + e.anharmonic;
  return e;
}

/// -dH/dq. The harmonic part is the convolution with the finitely
/// supported couplings; the anharmonic part is local in x.
inline void chain_forces(const ChainState& s, std::vector<double>& f) {
  const std::size_t L = s.size();
  const long Ll = static_cast<long>(L);
  f.assign(L, 0.0);
  const auto& alpha = s.dispersion.couplings();
  for (std::size_t x = 0; x < L; ++x) {
    double acc = 0;
    for (const auto& [off, a] : alpha) {
      long y = (static_cast<long>(x) + off[0]) % Ll;
      if (y < 0) y += Ll;
      acc += a * s.q[static_cast<std::size_t>(y)];
    }
    f[x] = -acc;
  }
  const double g = std::sqrt(s.lambda);
  if (g > 0) {
    switch (s.potential) {
      case Potential::OnsiteQuartic:
        for (std::size_t x = 0; x < L; ++x) f[x] -= g * s.q[x] * s.q[x] * s.q[x];
        break;
      case Potential::FpuAlphaCubicBond:
        for (std::size_t x = 0; x < L; ++x) {
          double dm = s.q[x] - s.q[(x + L - 1) % L];
          double dp = s.q[(x + 1) % L] - s.q[x];
          f[x] -= g * (dm * dm - dp * dp);
        }
        break;
      case Potential::FpuBetaQuarticBond:
        for (std::size_t x = 0; x < L; ++x) {
          double dm = s.q[x] - s.q[(x + L - 1) % L];
          double dp = s.q[(x + 1) % L] - s.q[x];
          f[x] -= g * (dm * dm * dm - dp * dp * dp);
        }
        break;
    }
  }
}

/// One velocity-Verlet step; time reversible, O(dt^3) energy error per step.
inline ChainState step_symplectic(const ChainState& s, double dt) {
  if (!(dt > 0)) throw domain_error("time step must be positive");
  ChainState out = s;
  std::vector<double> f;
  chain_forces(out, f);
  const std::size_t L = s.size();
  for (std::size_t x = 0; x < L; ++x) out.p[x] += 0.5 * dt * f[x];
  for (std::size_t x = 0; x < L; ++x) out.q[x] += dt * out.p[x];
  chain_forces(out, f);
  for (std::size_t x = 0; x < L; ++x) out.p[x] += 0.5 * dt * f[x];
  return out;
}

/// In-place stepping for long runs.
inline void step_symplectic_inplace(ChainState& s, double dt, std::vector<double>& scratch) {
  chain_forces(s, scratch);
  const std::size_t L = s.size();
  for (std::size_t x = 0; x < L; ++x) s.p[x] += 0.5 * dt * scratch[x];
  for (std::size_t x = 0; x < L; ++x) s.q[x] += dt * s.p[x];
  chain_forces(s, scratch);
  for (std::size_t x = 0; x < L; ++x) s.p[x] += 0.5 * dt * scratch[x];
}

}  // namespace phonon

#endif
