#ifndef PHONON_MOLLIFIED_HPP
#define PHONON_MOLLIFIED_HPP

#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#include "phonon/common.hpp"
#include "phonon/dispersion.hpp"
#include "phonon/grid.hpp"
#include "phonon/threads.hpp"

namespace phonon {

// Where exact root resolution is impractical (3D grids) the energy delta is
// replaced by a normalized Gaussian of width epsilon; results carry an
// O(epsilon) + O(1/(N epsilon)) bias that vanishes under joint refinement.

enum class SigmaChannel { All, PairOnly, MergerOnly };

struct MollifiedOptions {
  SigmaChannel channels = SigmaChannel::All;
  std::vector<std::size_t> outputs;  // empty: the whole grid
  double cost_budget = 4e9;          // bracket evaluations, not flops
};

/// Mollifier scale matched to the grid: 2 max|grad omega| / N.
template <int D>
double default_mollifier_width(const MomentumGrid<D>& grid, const Dispersion<D>& spec) {
  double m = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Vec<D> k = grid.point(i);
    double g;
    if (spec.kind() == DispersionKind::NlsQuadratic) {
      g = std::sqrt(norm2sq(k));
    } else {
      double w = spec.eval(k);
      if (w < 1e-9) continue;
      g = 2.0 * pi * std::sqrt(norm2sq(spec.group_velocity(k)));
    }
    m = std::max(m, g);
  }
  return 2.0 * m / grid.points_per_axis();
}

namespace detail {

inline double gauss_delta(double e, double eps) {
  return std::exp(-0.5 * e * e / (eps * eps)) / (eps * std::sqrt(2.0 * pi));
}

template <int D>
std::array<int, D> unflatten(std::size_t f, int n) {
  std::array<int, D> idx;
  for (int j = 0; j < D; ++j) {
    idx[j] = static_cast<int>(f % static_cast<std::size_t>(n));
    f /= static_cast<std::size_t>(n);
  }
  return idx;
}

}  // namespace detail

/// Quartic-phonon collision rate on a torus grid with the momentum delta
/// resolved exactly in index arithmetic and the energy delta mollified.
template <int D>
std::vector<double> evaluate_collision_mollified(const MomentumGrid<D>& grid,
                                                 const Dispersion<D>& spec,
                                                 const std::vector<double>& W, double epsilon,
                                                 const MollifiedOptions& opt = {}) {
  if (grid.domain() != MomentumDomain::Torus || spec.domain() != MomentumDomain::Torus)
    throw domain_error("mollified quartic-phonon rate expects a torus grid");
  if (W.size() != grid.size()) throw domain_error("state does not live on the grid");
  if (!(epsilon > 0)) throw domain_error("mollifier width must be positive");

  const int N = grid.points_per_axis();
  const std::size_t M = grid.size();
  std::vector<std::size_t> outs = opt.outputs;
  if (outs.empty()) {
    outs.resize(M);
    for (std::size_t i = 0; i < M; ++i) outs[i] = i;
  }
  double est = static_cast<double>(outs.size()) * static_cast<double>(M) *
               static_cast<double>(M) * 8.0;
  if (est > opt.cost_budget) {
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "mollified evaluation refused: ~%.3g bracket evaluations exceed budget %.3g",
                  est, opt.cost_budget);
    throw cost_guard_error(buf, est);
  }

  std::vector<double> omega(M);
  for (std::size_t i = 0; i < M; ++i) omega[i] = spec.eval(grid.point(i));
  const double w2 = grid.weight() * grid.weight();
  const int H = N / 2;

  // sign vectors, grouped: sum sigma = -1 are pair channels, the rest merge
  // or split phonon number; (+,+,+) can never balance energy
  const int sigmas[8][3] = {{-1, -1, 1}, {-1, 1, -1}, {1, -1, -1}, {-1, -1, -1},
                            {1, 1, -1},  {1, -1, 1},  {-1, 1, 1},  {1, 1, 1}};
  std::vector<double> out(M, 0.0);

  parallel_chunks(outs.size(), 1, [&](std::size_t oi, std::size_t, std::size_t) {
    const std::size_t kflat = outs[oi];
    const auto kidx = detail::unflatten<D>(kflat, N);
    const double wk = omega[kflat];
    double acc = 0;
    for (int s = 0; s < 8; ++s) {
      int s1 = sigmas[s][0], s2 = sigmas[s][1], s3 = sigmas[s][2];
      bool pair = (s1 + s2 + s3 == -1);
      if (opt.channels == SigmaChannel::PairOnly && !pair) continue;
      if (opt.channels == SigmaChannel::MergerOnly && pair) continue;
      for (std::size_t f1 = 0; f1 < M; ++f1) {
        const auto i1 = detail::unflatten<D>(f1, N);
        const double w1 = omega[f1];
        const double W1 = W[f1];
        for (std::size_t f2 = 0; f2 < M; ++f2) {
          const auto i2 = detail::unflatten<D>(f2, N);
          // momentum delta: k3 = -s3 (k + s1 k1 + s2 k2) mod 1
          std::array<int, D> i3;
          for (int j = 0; j < D; ++j) {
            long t = static_cast<long>(kidx[j] - H) + s1 * static_cast<long>(i1[j] - H) +
                     s2 * static_cast<long>(i2[j] - H);
            long v = -static_cast<long>(s3) * t;
            v = ((v + H) % N + N) % N;
            i3[j] = static_cast<int>(v);
          }
          std::size_t f3 = grid.flatten(i3);
          double e = wk + s1 * w1 + s2 * omega[f2] + s3 * omega[f3];
          double dl = detail::gauss_delta(e, epsilon);
          if (dl < 1e-300) continue;
          double W2 = W[f2], W3 = W[f3];
          double bracket = W1 * W2 * W3 +
                           W[kflat] * (s1 * W2 * W3 + W1 * s2 * W3 + W1 * W2 * s3);
          acc += dl * bracket / (16.0 * wk * w1 * omega[f2] * omega[f3]);
        }
      }
    }
    out[kflat] = 12.0 * pi * w2 * acc;
  });
  return out;
}

struct NlsOptions {
  std::vector<std::size_t> outputs;
  double cost_budget = 4e9;
  double exclusion_window = 0.0;  // drop contributions near the exchange roots
};

/// Collision rate of the quadratic-dispersion (wave-function) kinetic
/// equation on a truncated continuum grid: |theta_hat(k1-k2)|^2 weighted,
/// number conserving by structure. In 1D the exact kinematics admits only
/// exchange roots, so the operator vanishes identically under root
/// resolution; the mollified value decays with epsilon once the exchange
/// neighborhoods are excluded.
template <int D>
std::vector<double> evaluate_collision_nls(const MomentumGrid<D>& grid,
                                           const std::vector<double>& W,
                                           const std::function<double(const Vec<D>&)>& theta_hat,
                                           double epsilon, const NlsOptions& opt = {}) {
  if (grid.domain() != MomentumDomain::Continuum)
    throw domain_error("the quadratic-dispersion rate expects a continuum grid");
  if (W.size() != grid.size()) throw domain_error("state does not live on the grid");
  if (!(epsilon > 0)) throw domain_error("mollifier width must be positive");

  const int N = grid.points_per_axis();
  const std::size_t M = grid.size();
  std::vector<std::size_t> outs = opt.outputs;
  if (outs.empty()) {
    outs.resize(M);
    for (std::size_t i = 0; i < M; ++i) outs[i] = i;
  }
  double est = static_cast<double>(outs.size()) * static_cast<double>(M) *
               static_cast<double>(M);
  if (est > opt.cost_budget) {
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "mollified evaluation refused: ~%.3g bracket evaluations exceed budget %.3g",
                  est, opt.cost_budget);
    throw cost_guard_error(buf, est);
  }

  std::vector<double> omega(M);
  for (std::size_t i = 0; i < M; ++i) omega[i] = 0.5 * norm2sq(grid.point(i));
  std::vector<double> out(M, 0.0);

  parallel_chunks(outs.size(), 1, [&](std::size_t oi, std::size_t, std::size_t) {
    const std::size_t f1 = outs[oi];
    const auto i1 = detail::unflatten<D>(f1, N);
    const Vec<D> k1 = grid.point(f1);
    double acc = 0;
    for (std::size_t f2 = 0; f2 < M; ++f2) {
      const auto i2 = detail::unflatten<D>(f2, N);
      const Vec<D> k2 = grid.point(f2);
      double th = theta_hat(k1 - k2);
      double th2 = th * th;
      if (th2 == 0.0) continue;
      for (std::size_t f3 = 0; f3 < M; ++f3) {
        const auto i3 = detail::unflatten<D>(f3, N);
        std::array<int, D> i4;
        bool inside = true;
        for (int j = 0; j < D; ++j) {
          int v = i1[j] + i2[j] - i3[j];
          if (v < 0 || v >= N) {
            inside = false;
            break;
          }
          i4[j] = v;
        }
        if (!inside) continue;  // the cutoff box is hard
        std::size_t f4 = grid.flatten(i4);
        if (opt.exclusion_window > 0) {
          const Vec<D> k3 = grid.point(f3);
          double dmin = std::min(std::sqrt(norm2sq(k3 - k1)), std::sqrt(norm2sq(k3 - k2)));
          if (dmin < opt.exclusion_window) continue;
        }
        double e = omega[f1] + omega[f2] - omega[f3] - omega[f4];
        double dl = detail::gauss_delta(e, epsilon);
        if (dl < 1e-300) continue;
        double W2 = W[f2], W3 = W[f3], W4 = W[f4];
        double bracket = W2 * W3 * W4 - W[f1] * (W2 * W3 + W2 * W4 - W3 * W4);
        acc += th2 * dl * bracket;
      }
    }
    out[f1] = 12.0 * pi * std::pow(grid.weight(), 2) * acc;
  });
  return out;
}

}  // namespace phonon

#endif
