#ifndef PHONON_NORMAL_MODES_HPP
#define PHONON_NORMAL_MODES_HPP

#include <cmath>
#include <complex>
#include <vector>

#include "phonon/chain.hpp"
#include "phonon/common.hpp"
#include "phonon/dispersion.hpp"

namespace phonon {

using cplx = std::complex<double>;

namespace detail {

// DFT with the e^{-i 2 pi k x} convention; radix-2 in place when the size is
// a power of two, direct summation otherwise (small sizes only).
inline void dft(std::vector<cplx>& a, bool inverse) {
  const std::size_t n = a.size();
  if ((n & (n - 1)) == 0) {
    for (std::size_t i = 1, j = 0; i < n; ++i) {
      std::size_t bit = n >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
      double ang = 2.0 * pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
      cplx wl(std::cos(ang), std::sin(ang));
      for (std::size_t i = 0; i < n; i += len) {
        cplx w(1.0);
        for (std::size_t j = 0; j < len / 2; ++j) {
          cplx u = a[i + j], v = a[i + j + len / 2] * w;
          a[i + j] = u + v;
          a[i + j + len / 2] = u - v;
          w *= wl;
        }
      }
    }
  } else {
    std::vector<cplx> out(n, cplx(0));
    double sgn = inverse ? 1.0 : -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t x = 0; x < n; ++x) {
        double ang = sgn * 2.0 * pi * static_cast<double>(j * x % n) / static_cast<double>(n);
        out[j] += a[x] * cplx(std::cos(ang), std::sin(ang));
      }
    }
    a = std::move(out);
  }
  if (inverse)
    for (auto& z : a) z /= static_cast<double>(n);
}

}  // namespace detail

/// Complex normal-mode amplitudes a(k_j), k_j = j/L reduced to [-1/2,1/2),
/// combining position and momentum of a real chain into one field.
struct ComplexField {
  std::vector<cplx> a;
  Dispersion<1> dispersion;

  ComplexField(std::size_t L, const Dispersion<1>& d) : a(L, cplx(0)), dispersion(d) {}

  std::size_t size() const { return a.size(); }

  double mode_momentum(std::size_t j) const {
    return wrap_unit(static_cast<double>(j) / static_cast<double>(a.size()));
  }
  double mode_omega(std::size_t j) const { return dispersion.eval(mode_momentum(j)); }

  /// DFT index of -k_j.
  std::size_t conj_index(std::size_t j) const { return j == 0 ? 0 : a.size() - j; }
};

/// a(k) = (sqrt(omega) qhat + i phat/sqrt(omega)) / sqrt(2). All factors of
/// the lattice size L live in this transform pair: with the unnormalized
/// forward DFT used here, thermal equilibrium gives <|a(k)|^2> = L/(beta
/// omega(k)) and the spectrum estimator divides the L back out.
inline ComplexField to_normal_modes(const ChainState& s) {
  const std::size_t L = s.size();
  ComplexField f(L, s.dispersion);
  std::vector<cplx> qh(L), ph(L);
  for (std::size_t x = 0; x < L; ++x) {
    qh[x] = cplx(s.q[x], 0.0);
    ph[x] = cplx(s.p[x], 0.0);
  }
  detail::dft(qh, false);
  detail::dft(ph, false);
  for (std::size_t j = 0; j < L; ++j) {
    double w = f.mode_omega(j);
    if (w < 1e-12)
      throw domain_error(
          "normal-mode transform undefined at a zero-frequency mode; use an optical "
          "dispersion (omega0 > 0)");
    double r = std::sqrt(w);
    f.a[j] = (r * qh[j] + cplx(0, 1) * ph[j] / r) / std::sqrt(2.0);
  }
  return f;
}

namespace detail {

/// Inverse DFT expected to produce a real sequence; imaginary residue above
/// tol (relative to the field scale) is a reality violation.
inline std::vector<double> inverse_real_dft(std::vector<cplx> spec, double tol = 1e-10) {
  detail::dft(spec, true);
  double scale = 0, imax = 0;
  for (const auto& z : spec) {
    scale = std::max(scale, std::abs(z));
    imax = std::max(imax, std::abs(z.imag()));
  }
  if (imax > tol * std::max(1.0, scale))
    throw numerical_error("non-conjugate-symmetric modes: inverse transform is not real");
  std::vector<double> out(spec.size());
  for (std::size_t x = 0; x < spec.size(); ++x) out[x] = spec[x].real();
  return out;
}

}  // namespace detail

/// Inverse of to_normal_modes: qhat = (a(k) + a(-k)*)/sqrt(2 omega),
/// phat = i sqrt(omega/2) (a(-k)* - a(k)), then inverse DFT.
inline ChainState from_normal_modes(const ComplexField& f, double lambda = 0.0,
                                    Potential pot = Potential::OnsiteQuartic) {
  const std::size_t L = f.size();
  std::vector<cplx> qh(L), ph(L);
  for (std::size_t j = 0; j < L; ++j) {
    double w = f.mode_omega(j);
    if (w < 1e-12) throw domain_error("zero-frequency mode in normal-mode field");
    cplx ac = std::conj(f.a[f.conj_index(j)]);
    qh[j] = (f.a[j] + ac) / std::sqrt(2.0 * w);
    ph[j] = cplx(0, 1) * std::sqrt(0.5 * w) * (ac - f.a[j]);
  }
  ChainState s(L, f.dispersion, lambda, pot);
  s.q = detail::inverse_real_dft(std::move(qh));
  s.p = detail::inverse_real_dft(std::move(ph));
  return s;
}

/// Harmonic flow for time t: each mode rotates by e^{-i omega(k) t}.
inline ComplexField free_evolve(const ComplexField& f, double t) {
  ComplexField out = f;
  for (std::size_t j = 0; j < f.size(); ++j) {
    double w = f.mode_omega(j);
    out.a[j] *= cplx(std::cos(w * t), -std::sin(w * t));
  }
  return out;
}

/// Discrete harmonic energy sum_k omega(k) |a(k)|^2 / L; equals the
/// quadratic form of the chain hamiltonian.
inline double harmonic_energy(const ComplexField& f) {
  double e = 0;
  for (std::size_t j = 0; j < f.size(); ++j) e += f.mode_omega(j) * std::norm(f.a[j]);
  return e / static_cast<double>(f.size());
}

}  // namespace phonon

#endif
