#ifndef PHONON_KINEMATICS_HPP
#define PHONON_KINEMATICS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <vector>

#include "phonon/common.hpp"
#include "phonon/dispersion.hpp"
#include "phonon/rng.hpp"
#include "phonon/threads.hpp"

namespace phonon {

/// One solution k3 of an energy-momentum conservation constraint.
/// degenerate marks exchange roots (k3 at k1 or k2) and roots whose
/// constraint derivative sits below the degeneracy floor.
struct KinematicRoot {
  double k3 = 0;
  double jacobian = 0;  // |F'(k3)|, central finite difference; 0 when degenerate
  bool degenerate = false;
  double residual = 0;  // |F(k3)|
};

namespace detail {

/// Sign-change bracketing on a uniform scan grid followed by bisection.
/// Returns root abscissas in [lo, hi). F must be continuous.
inline std::vector<double> scan_roots(const std::function<double(double)>& f, double lo,
                                      double hi, int scan_points, double ftol) {
  std::vector<double> roots;
  double h = (hi - lo) / scan_points;
  double xa = lo, fa = f(xa);
  for (int i = 1; i <= scan_points; ++i) {
    double xb = lo + i * h;
    double fb = f(xb);
    if (fa == 0.0) {
      roots.push_back(xa);
    } else if (fa * fb < 0.0) {
      double a = xa, b = xb, va = fa;
      for (int it = 0; it < 200; ++it) {
        double m = 0.5 * (a + b);
        double vm = f(m);
        if (std::abs(vm) <= ftol || 0.5 * (b - a) < 1e-15) {
          a = b = m;
          break;
        }
        if (va * vm < 0.0)
          b = m;
        else {
          a = m;
          va = vm;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    xa = xb;
    fa = fb;
  }
  return roots;
}

}  // namespace detail

struct PairKinematicsOptions {
  int scan_points = 4096;
  double degeneracy_floor = 1e-8;
  double fd_step = 1e-6;
  double exchange_tol = 1e-9;  // |k3 - k1,2| below this marks an exchange root
};

/// All roots k3 of omega(k3) + omega(k1+k2-k3) = omega(k1) + omega(k2)
/// in one period (torus) or inside the cutoff box (continuum), 1D only.
/// The exchange solutions k3 = k1 and k3 = k2 are always reported, flagged
/// degenerate; near-critical roots are flagged rather than dropped.
inline std::vector<KinematicRoot> solve_pair_kinematics(const Dispersion<1>& spec, double k1,
                                                        double k2, double tol,
                                                        const PairKinematicsOptions& opt = {}) {
  if (tol <= 0) throw domain_error("root tolerance must be positive");
  const bool torus = spec.domain() == MomentumDomain::Torus;
  const double K = k1 + k2;
  const double target = spec.eval(k1) + spec.eval(k2);
  auto F = [&](double x) { return spec.eval(x) + spec.eval(K - x) - target; };

  double lo, hi;
  if (torus) {
    lo = -0.5;
    hi = 0.5;
  } else {
    // keep both k3 and k4 = K - k3 inside the cutoff box
    double c = spec.cutoff();
    lo = std::max(-c, K - c);
    hi = std::min(c, K + c);
    if (!(lo < hi)) return {};
  }

  std::vector<double> xs = detail::scan_roots(F, lo, hi, opt.scan_points, tol);
  xs.push_back(k1);  // exchange solutions, always present
  xs.push_back(k2);

  auto same = [&](double a, double b) {
    return torus ? circ_dist(a, b) < 1e-7 : std::abs(a - b) < 1e-7;
  };
  std::vector<KinematicRoot> out;
  for (double x : xs) {
    bool dup = false;
    for (const auto& r : out)
      if (same(r.k3, x)) { dup = true; break; }
    if (dup) continue;
    KinematicRoot r;
    r.k3 = torus ? wrap_unit(x) : x;
    r.residual = std::abs(F(x));
    double fd = std::abs(F(x + opt.fd_step) - F(x - opt.fd_step)) / (2.0 * opt.fd_step);
    bool exchange = same(x, k1) || same(x, k2);
    if (exchange) {
      r.degenerate = true;
      r.jacobian = fd;
    } else if (fd < opt.degeneracy_floor) {
      r.degenerate = true;
      r.jacobian = 0.0;
    } else {
      r.jacobian = fd;
    }
    out.push_back(r);
  }
  std::sort(out.begin(), out.end(),
            [](const KinematicRoot& a, const KinematicRoot& b) { return a.k3 < b.k3; });
  return out;
}

/// Random search for three-phonon merger kinematics,
/// omega(k1)+omega(k2)+omega(k3) = omega(k1+k2+k3 mod 1).
template <int D>
struct MergerScanReport {
  double min_residual = 0;
  Vec<D> k1{}, k2{}, k3{};
  long samples = 0;
  std::uint64_t seed = 0;
};

template <int D>
MergerScanReport<D> scan_merger_kinematics(const Dispersion<D>& spec, long samples,
                                           std::uint64_t seed) {
  if (spec.domain() != MomentumDomain::Torus)
    throw domain_error("merger scan expects a torus dispersion");
  if (samples < 1) throw domain_error("merger scan needs at least one sample");

  struct Best {
    double res = 1e300;
    Vec<D> k1{}, k2{}, k3{};
  };
  std::vector<Best> chunk_best;
  std::mutex m;
  const std::size_t chunk = 1 << 16;
  std::uint64_t key = rng_key(seed, 0x6d657267);  // sample index splits the stream
  parallel_chunks(static_cast<std::size_t>(samples), chunk,
                  [&](std::size_t beg, std::size_t end, std::size_t ci) {
                    Best b;
                    for (std::size_t s = beg; s < end; ++s) {
                      Vec<D> k1v, k2v, k3v, sum;
                      for (int j = 0; j < D; ++j) {
                        k1v[j] = rng_uniform(key, 8 * (3 * s) + j) - 0.5;
                        k2v[j] = rng_uniform(key, 8 * (3 * s + 1) + j) - 0.5;
                        k3v[j] = rng_uniform(key, 8 * (3 * s + 2) + j) - 0.5;
                        sum[j] = wrap_unit(k1v[j] + k2v[j] + k3v[j]);
                      }
                      double res = spec.eval(k1v) + spec.eval(k2v) + spec.eval(k3v) -
                                   spec.eval(sum);
                      if (res < b.res) {
                        b.res = res;
                        b.k1 = k1v;
                        b.k2 = k2v;
                        b.k3 = k3v;
                      }
                    }
                    std::lock_guard<std::mutex> g(m);
                    if (chunk_best.size() <= ci) chunk_best.resize(ci + 1);
                    chunk_best[ci] = b;
                  });
  MergerScanReport<D> rep;
  rep.samples = samples;
  rep.seed = seed;
  Best best;
  for (const auto& b : chunk_best)
    if (b.res < best.res) best = b;
  rep.min_residual = best.res;
  rep.k1 = best.k1;
  rep.k2 = best.k2;
  rep.k3 = best.k3;
  return rep;
}

/// Refined points on the 1D merger manifold: for random pairs (k1,k2) the
/// residual is solved to a root in k3 where a sign change exists. Empty for
/// dispersions that forbid mergers.
struct MergerSample {
  double k1, k2, k3;
  double residual;
};

inline std::vector<MergerSample> merger_manifold_samples(const Dispersion<1>& spec,
                                                         long pair_samples,
                                                         std::uint64_t seed,
                                                         double tol = 1e-11,
                                                         int scan_points = 2048) {
  const bool torus = spec.domain() == MomentumDomain::Torus;
  const double c = torus ? 0.5 : spec.cutoff();
  std::vector<MergerSample> out;
  std::uint64_t key = rng_key(seed, 0x6d666c64);
  for (long s = 0; s < pair_samples; ++s) {
    double k1 = (2.0 * rng_uniform(key, 2 * s) - 1.0) * c;
    double k2 = (2.0 * rng_uniform(key, 2 * s + 1) - 1.0) * c;
    double base = spec.eval(k1) + spec.eval(k2);
    auto g = [&](double x) { return base + spec.eval(x) - spec.eval(k1 + k2 + x); };
    double lo = -c, hi = c;
    if (!torus) {  // keep the merged momentum k1+k2+x inside the cutoff box
      lo = std::max(lo, -c - (k1 + k2));
      hi = std::min(hi, c - (k1 + k2));
      if (!(lo < hi)) continue;
    }
    for (double x : detail::scan_roots(g, lo, hi, scan_points, tol)) {
      out.push_back({k1, k2, torus ? wrap_unit(x) : x, std::abs(g(x))});
    }
  }
  return out;
}

}  // namespace phonon

#endif
