#ifndef PHONON_ENSEMBLE_HPP
#define PHONON_ENSEMBLE_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <vector>

#include "phonon/chain.hpp"
#include "phonon/common.hpp"
#include "phonon/grid.hpp"
#include "phonon/normal_modes.hpp"
#include "phonon/rng.hpp"
#include "phonon/threads.hpp"

namespace phonon {

struct EnsembleSpec {
  double beta;
  long realizations;  // M
  std::uint64_t seed;
  std::size_t L;

  EnsembleSpec(double b, long M, std::uint64_t s, std::size_t length)
      : beta(b), realizations(M), seed(s), L(length) {
    if (!(beta > 0)) throw construction_error("inverse temperature must be positive");
    if (realizations < 1) throw construction_error("ensemble needs at least one realization");
    if (L < 4 || L % 2 != 0) throw construction_error("ensemble lattice size must be even, >= 4");
  }
};

/// DFT mode index j <-> sorted-grid index of k_j = j/L in [-1/2, 1/2).
inline std::size_t mode_to_grid_index(std::size_t j, std::size_t L) {
  return (j + L / 2) % L;
}

/// One draw from the harmonic Gibbs ensemble: independent complex Gaussian
/// modes with <|a(k)|^2> = L/(beta omega(k)). Deterministic in
/// (seed, realization, mode).
inline ComplexField sample_harmonic_gibbs(const EnsembleSpec& spec,
                                          const Dispersion<1>& disp,
                                          long realization = 0) {
  ComplexField f(spec.L, disp);
  std::uint64_t key = rng_key(spec.seed, 0x67696273, static_cast<std::uint64_t>(realization));
  for (std::size_t j = 0; j < spec.L; ++j) {
    double w = f.mode_omega(j);
    if (w < 1e-12) throw domain_error("Gibbs sampling requires omega > 0 on every mode");
    double sigma = std::sqrt(static_cast<double>(spec.L) / (2.0 * spec.beta * w));
    auto [z1, z2] = rng_gauss_pair(key, j);
    f.a[j] = cplx(sigma * z1, sigma * z2);
  }
  return f;
}

/// Gaussian field with a prescribed spectrum W0 on the sorted mode grid:
/// <|a(k_j)|^2> = L W0(k_j).
inline ComplexField sample_gaussian_spectrum(const std::vector<double>& W0_sorted,
                                             const Dispersion<1>& disp, std::uint64_t seed,
                                             long realization = 0) {
  const std::size_t L = W0_sorted.size();
  ComplexField f(L, disp);
  std::uint64_t key = rng_key(seed, 0x73706563, static_cast<std::uint64_t>(realization));
  for (std::size_t j = 0; j < L; ++j) {
    double W = W0_sorted[mode_to_grid_index(j, L)];
    if (!(W >= 0)) throw domain_error("spectrum must be nonnegative");
    double sigma = std::sqrt(0.5 * static_cast<double>(L) * W);
    auto [z1, z2] = rng_gauss_pair(key, j);
    f.a[j] = cplx(sigma * z1, sigma * z2);
  }
  return f;
}

/// Empirical power spectrum on the sorted momentum grid with per-mode
/// standard errors: W(k_j) = mean |a(k_j)|^2 / L.
struct SpectrumEstimate {
  WignerState<1> state;
  std::vector<double> stderr_;
  long realizations = 0;

  explicit SpectrumEstimate(const MomentumGrid<1>& g)
      : state(g), stderr_(g.size(), 0.0) {}
};

inline SpectrumEstimate estimate_power_spectrum(const std::vector<ComplexField>& fields) {
  if (fields.empty()) throw domain_error("spectrum estimate needs at least one field");
  const std::size_t L = fields[0].size();
  for (const auto& f : fields)
    if (f.size() != L) throw domain_error("fields of mixed lattice size");
  MomentumGrid<1> grid(static_cast<int>(L));
  SpectrumEstimate est(grid);
  const double M = static_cast<double>(fields.size());
  std::vector<double> sum(L, 0.0), sumsq(L, 0.0);
  for (const auto& f : fields) {
    for (std::size_t j = 0; j < L; ++j) {
      double v = std::norm(f.a[j]) / static_cast<double>(L);
      std::size_t i = mode_to_grid_index(j, L);
      sum[i] += v;
      sumsq[i] += v * v;
    }
  }
  for (std::size_t i = 0; i < L; ++i) {
    double mean = sum[i] / M;
    est.state.values[i] = mean;
    double var = fields.size() > 1 ? (sumsq[i] - M * mean * mean) / (M - 1.0) : 0.0;
    est.stderr_[i] = std::sqrt(std::max(0.0, var) / M);
  }
  est.realizations = static_cast<long>(fields.size());
  return est;
}

/// Empirical covariance of |a(k1)|^2 and |a(k2)|^2 across the ensemble,
/// normalized by the product of means. Vanishes for independent Gaussian
/// modes; the homogeneous counterpart of spectrum factorization.
inline double spectrum_covariance(const std::vector<ComplexField>& fields,
                                  std::size_t grid_i1, std::size_t grid_i2) {
  if (fields.size() < 2) throw domain_error("covariance needs at least two realizations");
  if (grid_i1 == grid_i2) throw domain_error("covariance requires two distinct modes");
  const std::size_t L = fields[0].size();
  // invert the sorted-grid mapping
  std::size_t j1 = (grid_i1 + L / 2) % L, j2 = (grid_i2 + L / 2) % L;
  double sx = 0, sy = 0, sxy = 0;
  const double M = static_cast<double>(fields.size());
  for (const auto& f : fields) {
    double x = std::norm(f.a[j1]), y = std::norm(f.a[j2]);
    sx += x;
    sy += y;
    sxy += x * y;
  }
  double mx = sx / M, my = sy / M;
  double cov = (sxy - M * mx * my) / (M - 1.0);
  double denom = mx * my;
  return denom > 0 ? cov / denom : 0.0;
}

struct MicroRunResult {
  std::vector<double> times;
  std::vector<SpectrumEstimate> snapshots;
  double max_energy_drift = 0.0;  // relative, worst realization
  double mean_energy = 0.0;
};

/// Ensemble-averaged microscopic run: sample the initial Gaussian field,
/// integrate the chain, record empirical spectra at the requested times.
/// Realizations are independent; per-chunk accumulators are merged in a
/// fixed order so results do not depend on the worker count.
inline MicroRunResult run_microscopic_experiment(
    const EnsembleSpec& spec, const Dispersion<1>& disp, double lambda, Potential pot,
    const std::vector<double>& t_snapshots, double dt,
    const std::vector<double>* W0_sorted = nullptr, double drift_abort = 0.01) {
  if (!(dt > 0)) throw domain_error("integrator.dt must be positive");
  for (std::size_t i = 1; i < t_snapshots.size(); ++i)
    if (t_snapshots[i] <= t_snapshots[i - 1])
      throw domain_error("snapshot times must be strictly increasing");

  const std::size_t L = spec.L;
  const std::size_t S = t_snapshots.size();
  MomentumGrid<1> grid(static_cast<int>(L));
  MicroRunResult result;
  result.times = t_snapshots;

  struct ChunkAcc {
    std::vector<double> sum, sumsq;  // S x L, flattened
    double drift = 0, energy = 0;
  };
  const std::size_t chunk = 16;
  std::size_t nchunks =
      (static_cast<std::size_t>(spec.realizations) + chunk - 1) / chunk;
  std::vector<ChunkAcc> accs(nchunks);
  std::mutex abort_mutex;
  std::string abort_msg;

  parallel_chunks(static_cast<std::size_t>(spec.realizations), chunk,
                  [&](std::size_t beg, std::size_t end, std::size_t ci) {
    ChunkAcc acc;
    acc.sum.assign(S * L, 0.0);
    acc.sumsq.assign(S * L, 0.0);
    std::vector<double> scratch(L);
    for (std::size_t m = beg; m < end; ++m) {
      ComplexField f0 =
          W0_sorted ? sample_gaussian_spectrum(*W0_sorted, disp, spec.seed,
                                               static_cast<long>(m))
                    : sample_harmonic_gibbs(spec, disp, static_cast<long>(m));
      ChainState s = from_normal_modes(f0, lambda, pot);
      double e0 = hamiltonian(s).total;
      acc.energy += e0;
      double t = 0;
      for (std::size_t isnap = 0; isnap < S; ++isnap) {
        long nsteps = std::lround((t_snapshots[isnap] - t) / dt);
        for (long st = 0; st < nsteps; ++st) step_symplectic_inplace(s, dt, scratch);
        t += static_cast<double>(nsteps) * dt;
        ComplexField f = to_normal_modes(s);
        for (std::size_t j = 0; j < L; ++j) {
          double v = std::norm(f.a[j]) / static_cast<double>(L);
          std::size_t i = mode_to_grid_index(j, L);
          acc.sum[isnap * L + i] += v;
          acc.sumsq[isnap * L + i] += v * v;
        }
      }
      double efinal = hamiltonian(s).total;
      double drift = std::isfinite(efinal)
                         ? std::abs(efinal - e0) / std::max(1e-300, std::abs(e0))
                         : std::numeric_limits<double>::infinity();
      acc.drift = std::max(acc.drift, drift);
      if (drift > drift_abort) {
        std::lock_guard<std::mutex> g(abort_mutex);
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "integrator instability: relative energy drift %.3g exceeds %.3g "
                      "(realization %zu)",
                      drift, drift_abort, m);
        abort_msg = buf;
      }
    }
    accs[ci] = std::move(acc);
  });
  if (!abort_msg.empty()) throw numerical_error(abort_msg);

  const double M = static_cast<double>(spec.realizations);
  result.max_energy_drift = 0;
  double esum = 0;
  std::vector<double> sum(S * L, 0.0), sumsq(S * L, 0.0);
  for (const auto& acc : accs) {
    for (std::size_t i = 0; i < S * L; ++i) {
      sum[i] += acc.sum[i];
      sumsq[i] += acc.sumsq[i];
    }
    result.max_energy_drift = std::max(result.max_energy_drift, acc.drift);
    esum += acc.energy;
  }
  result.mean_energy = esum / M;
  for (std::size_t isnap = 0; isnap < S; ++isnap) {
    SpectrumEstimate est(grid);
    for (std::size_t i = 0; i < L; ++i) {
      double mean = sum[isnap * L + i] / M;
      est.state.values[i] = mean;
      double var = M > 1 ? (sumsq[isnap * L + i] - M * mean * mean) / (M - 1.0) : 0.0;
      est.stderr_[i] = std::sqrt(std::max(0.0, var) / M);
    }
    est.realizations = spec.realizations;
    result.snapshots.push_back(std::move(est));
  }
  return result;
}

}  // namespace phonon

#endif
