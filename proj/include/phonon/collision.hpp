#ifndef PHONON_COLLISION_HPP
#define PHONON_COLLISION_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "phonon/common.hpp"
#include "phonon/dispersion.hpp"
#include "phonon/grid.hpp"
#include "phonon/threads.hpp"

namespace phonon {

// The collision manifold is resolved against the piecewise-linear
// interpolant of the grid-sampled dispersion, and off-grid occupations are
// interpolated harmonically (linearly in 1/W). With rates scattered to all
// four participants of a quadruple through the same stencils, the discrete
// operator annihilates every state 1/(a + c omega) exactly, conserves
// energy (and number, for pair channels) by antisymmetry, and obeys an
// entrywise H-theorem -- quadrature error never pollutes those identities.

/// One 2<->2 quadruple: grid pair (i1,i2) against the off-grid outgoing
/// pair (k3, k4) held as interpolation stencils.
struct PairEntry {
  std::uint32_t i1, i2;
  std::uint32_t j3, j3n;
  std::uint32_t j4, j4n;
  double t3, t4;
  double weight;
};

/// One 3->1 quadruple: grid pair (ic,id) plus the off-grid third phonon e
/// and the merged phonon a = c+d+e.
struct MergerEntry {
  std::uint32_t ic, id;
  std::uint32_t je, jen;
  std::uint32_t ja, jan;
  double te, ta;
  double weight;
};

struct KernelDiagnostics {
  long pair_entries = 0;
  long merger_entries = 0;
  long exchange_excluded = 0;
  long degenerate_excised = 0;   // |F'| under the degeneracy floor
  long omega_floor_skipped = 0;  // acoustic guard: 1/omega weight would blow up
  double max_energy_residual = 0;
};

struct KernelBuildOptions {
  double degeneracy_floor = 1e-8;
  double omega_floor = 1e-9;
  bool pair_channel = true;
  bool merger_channel = true;
  double rate_scale = 1.0;
};

/// Precomputed collision manifold of a 1D dispersion on a momentum grid.
struct CollisionKernel {
  MomentumGrid<1> grid;
  std::vector<double> omega;  // dispersion sampled on the grid
  std::vector<PairEntry> pairs;
  std::vector<MergerEntry> mergers;
  double tol = 1e-12;
  KernelBuildOptions options;
  std::string dispersion_key;
  KernelDiagnostics diag;

  explicit CollisionKernel(const MomentumGrid<1>& g) : grid(g) {}

  bool pair_only() const { return mergers.empty(); }

  std::string cache_key() const {
    char buf[128];
    std::snprintf(buf, sizeof buf, "|N=%d|tol=%.17g|floor=%.17g|wfloor=%.17g|ch=%d%d|rs=%.17g",
                  grid.points_per_axis(), tol, options.degeneracy_floor, options.omega_floor,
                  options.pair_channel ? 1 : 0, options.merger_channel ? 1 : 0,
                  options.rate_scale);
    return dispersion_key + buf;
  }
};

namespace detail {

struct SegmentRoot {
  double x;
  double slope;
  std::size_t node;   // left node of the host cell
  bool at_node;
};

// Roots of a function linear on every grid cell, given its node values.
// Node zeros are registered once, from the cell to their right.
inline void cell_roots(const std::vector<double>& f, const MomentumGrid<1>& grid, bool wrap,
                       std::vector<SegmentRoot>& out) {
  const std::size_t N = f.size();
  const double h = grid.spacing();
  const std::size_t last = wrap ? N : N - 1;
  double scale = 0;
  for (double v : f)
    if (std::isfinite(v)) scale = std::max(scale, std::abs(v));
  const double eps = 1e-13 * std::max(1.0, scale);
  for (std::size_t i = 0; i < last; ++i) {
    double fl = f[i], fr = f[(i + 1) % N];
    if (!std::isfinite(fl) || !std::isfinite(fr)) continue;
    double slope = (fr - fl) / h;
    if (std::abs(fl) <= eps) {
      double central = slope;
      if (wrap || i > 0) {
        double back = f[(i + N - 1) % N];
        if (std::isfinite(back)) central = (fr - back) / (2.0 * h);
      }
      out.push_back({grid.axis_point(static_cast<int>(i)), central, i, true});
      continue;
    }
    if (fl * fr < 0.0)
      out.push_back({grid.axis_point(static_cast<int>(i)) + h * fl / (fl - fr), slope, i, false});
  }
}

}  // namespace detail

/// Builds the quadruple table for a 1D grid: for every grid pair the
/// momentum constraint fixes k4 = k1+k2-k3 (mod 1 on the torus) and the
/// energy constraint is solved cell by cell, where it is exactly linear.
/// Sign channels that cannot balance energy contribute nothing; mergers are
/// enumerated whenever their constraint has roots.
inline CollisionKernel build_kernel_1d(const MomentumGrid<1>& grid, const Dispersion<1>& spec,
                                       double tol = 1e-12, const KernelBuildOptions& opt = {}) {
  if (spec.domain() != grid.domain())
    throw domain_error("dispersion and grid live on different momentum domains");
  if (!(tol > 0)) throw domain_error("kernel tolerance must be positive");

  const bool torus = grid.domain() == MomentumDomain::Torus;
  const int N = grid.points_per_axis();
  const std::size_t Ns = static_cast<std::size_t>(N);
  const double dx = grid.spacing();

  CollisionKernel kernel(grid);
  kernel.tol = tol;
  kernel.options = opt;
  kernel.dispersion_key = spec.describe();
  auto& w = kernel.omega;
  w.resize(Ns);
  for (std::size_t i = 0; i < Ns; ++i) w[i] = spec.eval(grid.point(i));

  struct ChunkOut {
    std::vector<PairEntry> pairs;
    std::vector<MergerEntry> mergers;
    KernelDiagnostics diag;
  };
  std::vector<ChunkOut> chunks(Ns);

  auto interp_omega = [&](const LinearStencil& s) {
    return (1.0 - s.t) * w[s.j0] + s.t * w[s.j1];
  };

  parallel_chunks(Ns, 1, [&](std::size_t i1, std::size_t, std::size_t ci) {
    ChunkOut& out = chunks[ci];
    std::vector<double> f(Ns);
    std::vector<detail::SegmentRoot> roots;
    if (w[i1] < opt.omega_floor) {
      out.diag.omega_floor_skipped += static_cast<long>(Ns - i1);
      return;
    }
    const double k1 = grid.axis_point(static_cast<int>(i1));
    for (std::size_t i2 = i1; i2 < Ns; ++i2) {
      if (w[i2] < opt.omega_floor) {
        ++out.diag.omega_floor_skipped;
        continue;
      }
      const double k2 = grid.axis_point(static_cast<int>(i2));
      const double K = k1 + k2;
      const double tau = w[i1] + w[i2];
      // ordered-pair enumeration folded to i1 <= i2
      const double pair_mult = (i1 == i2) ? 1.0 : 2.0;

      if (opt.pair_channel) {
        // node values of F(x) = omega~(x) + omega~(K-x) - tau; the partner
        // K - x stays grid-aligned, so F is linear on every cell
        bool any = false;
        for (std::size_t i = 0; i < Ns; ++i) {
          long p = static_cast<long>(i1 + i2) - static_cast<long>(i);
          double wp;
          if (torus) {
            wp = w[static_cast<std::size_t>(grid.wrap_index(p))];
          } else if (p >= 0 && p < N) {
            wp = w[static_cast<std::size_t>(p)];
          } else {
            f[i] = std::numeric_limits<double>::quiet_NaN();
            continue;
          }
          f[i] = w[i] + wp - tau;
          any = true;
        }
        if (any) {
          roots.clear();
          detail::cell_roots(f, grid, torus, roots);
          for (const auto& r : roots) {
            bool exchange = torus ? (circ_dist(r.x, k1) < 1e-9 || circ_dist(r.x, k2) < 1e-9)
                                  : (std::abs(r.x - k1) < 1e-9 || std::abs(r.x - k2) < 1e-9);
            if (exchange) {
              ++out.diag.exchange_excluded;
              continue;
            }
            if (std::abs(r.slope) < opt.degeneracy_floor) {
              ++out.diag.degenerate_excised;
              continue;
            }
            double x4 = K - r.x;
            if (!torus && !grid.in_domain(x4)) continue;
            LinearStencil s3 = grid.locate(r.x);
            LinearStencil s4 = grid.locate(x4);
            double w3 = interp_omega(s3), w4 = interp_omega(s4);
            if (w3 < opt.omega_floor || w4 < opt.omega_floor) {
              ++out.diag.omega_floor_skipped;
              continue;
            }
            double resid = std::abs(tau - w3 - w4);
            out.diag.max_energy_residual = std::max(out.diag.max_energy_residual, resid);
            double weight = pair_mult * opt.rate_scale * (9.0 * pi / 16.0) /
                            (w[i1] * w[i2] * w3 * w4) * dx / std::abs(r.slope);
            out.pairs.push_back({static_cast<std::uint32_t>(i1), static_cast<std::uint32_t>(i2),
                                 static_cast<std::uint32_t>(s3.j0), static_cast<std::uint32_t>(s3.j1),
                                 static_cast<std::uint32_t>(s4.j0), static_cast<std::uint32_t>(s4.j1),
                                 s3.t, s4.t, weight});
          }
        }
      }

      if (opt.merger_channel && torus) {
        // G(x) = omega_c + omega_d + omega~(x) - omega~(K+x): a root is a
        // third phonon e merging with the grid pair into a = c+d+e
        for (std::size_t i = 0; i < Ns; ++i) {
          std::size_t p = static_cast<std::size_t>(grid.wrap_index(static_cast<long>(i1 + i2 + i)));
          f[i] = tau + w[i] - w[p];
        }
        roots.clear();
        detail::cell_roots(f, grid, true, roots);
        for (const auto& r : roots) {
          if (std::abs(r.slope) < opt.degeneracy_floor) {
            ++out.diag.degenerate_excised;
            continue;
          }
          LinearStencil se = grid.locate(r.x);
          LinearStencil sa = grid.locate(K + r.x);
          double we = interp_omega(se), wa = interp_omega(sa);
          if (we < opt.omega_floor || wa < opt.omega_floor) {
            ++out.diag.omega_floor_skipped;
            continue;
          }
          double resid = std::abs(wa - tau - we);
          out.diag.max_energy_residual = std::max(out.diag.max_energy_residual, resid);
          double weight = pair_mult * opt.rate_scale * (12.0 * pi / 16.0) /
                          (wa * w[i1] * w[i2] * we) * dx / std::abs(r.slope);
          out.mergers.push_back({static_cast<std::uint32_t>(i1), static_cast<std::uint32_t>(i2),
                                 static_cast<std::uint32_t>(se.j0), static_cast<std::uint32_t>(se.j1),
                                 static_cast<std::uint32_t>(sa.j0), static_cast<std::uint32_t>(sa.j1),
                                 se.t, sa.t, weight});
        }
      }
    }
  });

  for (const auto& c : chunks) {
    kernel.pairs.insert(kernel.pairs.end(), c.pairs.begin(), c.pairs.end());
    kernel.mergers.insert(kernel.mergers.end(), c.mergers.begin(), c.mergers.end());
    kernel.diag.exchange_excluded += c.diag.exchange_excluded;
    kernel.diag.degenerate_excised += c.diag.degenerate_excised;
    kernel.diag.omega_floor_skipped += c.diag.omega_floor_skipped;
    kernel.diag.max_energy_residual =
        std::max(kernel.diag.max_energy_residual, c.diag.max_energy_residual);
  }
  kernel.diag.pair_entries = static_cast<long>(kernel.pairs.size());
  kernel.diag.merger_entries = static_cast<long>(kernel.mergers.size());
  if (kernel.diag.max_energy_residual > tol)
    throw numerical_error("kernel energy residual exceeds the requested tolerance");
  return kernel;
}

/// Harmonic two-point interpolation: linear in 1/W, the variable in which
/// the stationary family is affine. Continuous at W = 0 (gives 0).
inline double harmonic_interp(double wa, double wb, double t) {
  double den = (1.0 - t) * wb + t * wa;
  if (den == 0.0) return 0.0;
  return wa * wb / den;
}

struct CollisionRate {
  std::vector<double> rate;
  std::vector<double> gain;  // the always-positive part, for loss normalization
};

/// C(W) on the kernel's grid. Gain and loss parts are accumulated
/// separately; loss(k) = gain(k) - rate(k).
inline CollisionRate evaluate_collision(const CollisionKernel& kernel,
                                        const std::vector<double>& W) {
  if (W.size() != kernel.grid.size())
    throw domain_error("Wigner state does not live on the kernel grid");
  const std::size_t N = W.size();
  CollisionRate out;
  out.rate.assign(N, 0.0);
  out.gain.assign(N, 0.0);
  auto& rate = out.rate;
  auto& gain = out.gain;

  for (const auto& e : kernel.pairs) {
    double W1 = W[e.i1], W2 = W[e.i2];
    double W3 = harmonic_interp(W[e.j3], W[e.j3n], e.t3);
    double W4 = harmonic_interp(W[e.j4], W[e.j4n], e.t4);
    double G = e.weight * (W3 * W4 * (W1 + W2) - W1 * W2 * (W3 + W4));
    rate[e.i1] += G;
    rate[e.i2] += G;
    rate[e.j3] -= (1.0 - e.t3) * G;
    rate[e.j3n] -= e.t3 * G;
    rate[e.j4] -= (1.0 - e.t4) * G;
    rate[e.j4n] -= e.t4 * G;
    double g34 = e.weight * W3 * W4;
    gain[e.i1] += g34 * W2;
    gain[e.i2] += g34 * W1;
    double g12 = e.weight * W1 * W2;
    gain[e.j3] += (1.0 - e.t3) * g12 * W4;
    gain[e.j3n] += e.t3 * g12 * W4;
    gain[e.j4] += (1.0 - e.t4) * g12 * W3;
    gain[e.j4n] += e.t4 * g12 * W3;
  }
  for (const auto& e : kernel.mergers) {
    double Wc = W[e.ic], Wd = W[e.id];
    double We = harmonic_interp(W[e.je], W[e.jen], e.te);
    double Wa = harmonic_interp(W[e.ja], W[e.jan], e.ta);
    double H = e.weight * (Wc * Wd * We - Wa * (Wc * Wd + Wc * We + Wd * We));
    rate[e.ja] += (1.0 - e.ta) * H;
    rate[e.jan] += e.ta * H;
    rate[e.ic] -= H;
    rate[e.id] -= H;
    rate[e.je] -= (1.0 - e.te) * H;
    rate[e.jen] -= e.te * H;
    double gcd = e.weight * Wc * Wd * We;
    gain[e.ja] += (1.0 - e.ta) * gcd;
    gain[e.jan] += e.ta * gcd;
    gain[e.ic] += e.weight * Wa * Wd * We;
    gain[e.id] += e.weight * Wa * Wc * We;
    gain[e.je] += (1.0 - e.te) * e.weight * Wa * Wc * Wd;
    gain[e.jen] += e.te * e.weight * Wa * Wc * Wd;
  }
  return out;
}

inline void evaluate_collision_rate(const CollisionKernel& kernel, const std::vector<double>& W,
                                    std::vector<double>& rate) {
  rate.assign(W.size(), 0.0);
  for (const auto& e : kernel.pairs) {
    double W1 = W[e.i1], W2 = W[e.i2];
    double W3 = harmonic_interp(W[e.j3], W[e.j3n], e.t3);
    double W4 = harmonic_interp(W[e.j4], W[e.j4n], e.t4);
    double G = e.weight * (W3 * W4 * (W1 + W2) - W1 * W2 * (W3 + W4));
    rate[e.i1] += G;
    rate[e.i2] += G;
    rate[e.j3] -= (1.0 - e.t3) * G;
    rate[e.j3n] -= e.t3 * G;
    rate[e.j4] -= (1.0 - e.t4) * G;
    rate[e.j4n] -= e.t4 * G;
  }
  for (const auto& e : kernel.mergers) {
    double Wc = W[e.ic], Wd = W[e.id];
    double We = harmonic_interp(W[e.je], W[e.jen], e.te);
    double Wa = harmonic_interp(W[e.ja], W[e.jan], e.ta);
    double H = e.weight * (Wc * Wd * We - Wa * (Wc * Wd + Wc * We + Wd * We));
    rate[e.ja] += (1.0 - e.ta) * H;
    rate[e.jan] += e.ta * H;
    rate[e.ic] -= H;
    rate[e.id] -= H;
    rate[e.je] -= (1.0 - e.te) * H;
    rate[e.jen] -= e.te * H;
  }
}

// ---- binary kernel cache -------------------------------------------------

namespace detail {

inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

template <class T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
bool get(std::ifstream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return bool(is);
}

}  // namespace detail

inline constexpr std::uint32_t kernel_cache_version = 1;

inline void save_kernel(const CollisionKernel& kernel, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw numerical_error("cannot open kernel cache for writing: " + path);
  std::string key = kernel.cache_key();
  os.write("PHKN", 4);
  detail::put(os, kernel_cache_version);
  detail::put(os, detail::fnv1a(key.data(), key.size()));
  std::uint64_t klen = key.size();
  detail::put(os, klen);
  os.write(key.data(), static_cast<std::streamsize>(klen));
  std::uint64_t np = kernel.pairs.size(), nm = kernel.mergers.size();
  detail::put(os, np);
  detail::put(os, nm);
  os.write(reinterpret_cast<const char*>(kernel.pairs.data()),
           static_cast<std::streamsize>(np * sizeof(PairEntry)));
  os.write(reinterpret_cast<const char*>(kernel.mergers.data()),
           static_cast<std::streamsize>(nm * sizeof(MergerEntry)));
  detail::put(os, kernel.diag);
}

/// Loads a cached kernel if the file matches (version, key); nullopt on any
/// mismatch so the caller rebuilds.
inline std::optional<CollisionKernel> load_kernel(const std::string& path,
                                                  const MomentumGrid<1>& grid,
                                                  const Dispersion<1>& spec, double tol,
                                                  const KernelBuildOptions& opt = {}) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "PHKN", 4) != 0) return std::nullopt;
  std::uint32_t version;
  if (!detail::get(is, version) || version != kernel_cache_version) return std::nullopt;

  CollisionKernel kernel(grid);
  kernel.tol = tol;
  kernel.options = opt;
  kernel.dispersion_key = spec.describe();
  std::string expect = kernel.cache_key();

  std::uint64_t hash, klen;
  if (!detail::get(is, hash) || !detail::get(is, klen)) return std::nullopt;
  if (klen != expect.size()) return std::nullopt;
  std::string key(klen, '\0');
  is.read(key.data(), static_cast<std::streamsize>(klen));
  if (!is || key != expect || hash != detail::fnv1a(key.data(), key.size())) return std::nullopt;

  std::uint64_t np, nm;
  if (!detail::get(is, np) || !detail::get(is, nm)) return std::nullopt;
  kernel.pairs.resize(np);
  kernel.mergers.resize(nm);
  is.read(reinterpret_cast<char*>(kernel.pairs.data()),
          static_cast<std::streamsize>(np * sizeof(PairEntry)));
  is.read(reinterpret_cast<char*>(kernel.mergers.data()),
          static_cast<std::streamsize>(nm * sizeof(MergerEntry)));
  if (!detail::get(is, kernel.diag)) return std::nullopt;
  kernel.omega.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) kernel.omega[i] = spec.eval(grid.point(i));
  for (const auto& e : kernel.pairs)
    if (e.i1 >= grid.size() || e.j3n >= grid.size() || e.j4n >= grid.size())
      return std::nullopt;
  return kernel;
}

/// Build with a transparent file cache: hits skip reconstruction.
inline CollisionKernel build_kernel_cached(const MomentumGrid<1>& grid,
                                           const Dispersion<1>& spec, double tol,
                                           const KernelBuildOptions& opt,
                                           const std::string& cache_path) {
  if (!cache_path.empty()) {
    if (auto k = load_kernel(cache_path, grid, spec, tol, opt)) return std::move(*k);
  }
  CollisionKernel k = build_kernel_1d(grid, spec, tol, opt);
  if (!cache_path.empty()) save_kernel(k, cache_path);
  return k;
}

}  // namespace phonon

#endif
