#ifndef PHONON_KINETIC_HPP
#define PHONON_KINETIC_HPP

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "phonon/collision.hpp"
#include "phonon/common.hpp"
#include "phonon/grid.hpp"

namespace phonon {

/// Thermal occupation 1/(beta omega(k)) on a grid.
inline WignerState<1> equilibrium_wigner(double beta, const MomentumGrid<1>& grid,
                                         const Dispersion<1>& spec) {
  if (!(beta > 0)) throw domain_error("beta must be positive");
  WignerState<1> W(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double w = spec.eval(grid.point(i));
    if (w < 1e-12)
      throw domain_error("equilibrium state undefined at a zero-frequency mode");
    W.values[i] = 1.0 / (beta * w);
  }
  return W;
}

struct EntropyValue {
  double value;
  bool finite;  // false: some W(k) <= 0, the entropy integral diverges to -inf
};

/// S(W) = sum log W(k_i) * weight. A nonpositive entry yields a flagged
/// -infinity instead of an error so relaxation runs may start from spectra
/// with empty modes.
inline EntropyValue entropy(const WignerState<1>& W) {
  double s = 0;
  for (double v : W.values) {
    if (!(v > 0.0)) return {-std::numeric_limits<double>::infinity(), false};
    s += std::log(v);
  }
  return {s * W.grid.weight(), true};
}

/// Entropy production sigma_S >= 0: the manifestly nonnegative quadratic
/// form over kernel quadruples, sum Lambda W1 W2 W3 W4 (sum sigma/W)^2.
/// Equals dS/dt along the homogeneous flow exactly, entry by entry.
inline double entropy_production(const CollisionKernel& kernel, const std::vector<double>& W) {
  const double dx = kernel.grid.weight();
  std::vector<double> psi(W.size());
  for (std::size_t i = 0; i < W.size(); ++i) {
    if (!(W[i] > 0.0)) throw domain_error("entropy production needs strictly positive W");
    psi[i] = 1.0 / W[i];
  }
  double sigma = 0;
  for (const auto& e : kernel.pairs) {
    double p3 = (1.0 - e.t3) * psi[e.j3] + e.t3 * psi[e.j3n];
    double p4 = (1.0 - e.t4) * psi[e.j4] + e.t4 * psi[e.j4n];
    double dpsi = psi[e.i1] + psi[e.i2] - p3 - p4;
    sigma += e.weight * dx * (W[e.i1] * W[e.i2] / (p3 * p4)) * dpsi * dpsi;
  }
  for (const auto& e : kernel.mergers) {
    double pe = (1.0 - e.te) * psi[e.je] + e.te * psi[e.jen];
    double pa = (1.0 - e.ta) * psi[e.ja] + e.ta * psi[e.jan];
    double dpsi = pa - psi[e.ic] - psi[e.id] - pe;
    sigma += e.weight * dx * (W[e.ic] * W[e.id] / (pa * pe)) * dpsi * dpsi;
  }
  return sigma;
}

namespace detail {

inline void rk4_collision_step(const CollisionKernel& kernel, const std::vector<double>& W,
                               double dt, std::vector<double>& out,
                               std::vector<double>& k1, std::vector<double>& k2,
                               std::vector<double>& k3, std::vector<double>& stage) {
  const std::size_t n = W.size();
  evaluate_collision_rate(kernel, W, k1);
  stage.resize(n);
  for (std::size_t i = 0; i < n; ++i) stage[i] = W[i] + 0.5 * dt * k1[i];
  evaluate_collision_rate(kernel, stage, k2);
  for (std::size_t i = 0; i < n; ++i) stage[i] = W[i] + 0.5 * dt * k2[i];
  evaluate_collision_rate(kernel, stage, k3);
  for (std::size_t i = 0; i < n; ++i) stage[i] = W[i] + dt * k3[i];
  evaluate_collision_rate(kernel, stage, out);  // out holds k4 momentarily
  for (std::size_t i = 0; i < n; ++i)
    out[i] = W[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + out[i]);
}

inline bool nonnegative(const std::vector<double>& v) {
  for (double x : v)
    if (x < 0.0 || !std::isfinite(x)) return false;
  return true;
}

}  // namespace detail

struct HomogeneousStepOptions {
  bool clamp = false;
  int max_halvings = 20;
};

/// Advances one local state over exactly dt, substepping with halved dt on
/// negativity unless clamping is on; persistent negativity is a stiffness
/// error. Shared by the homogeneous step and the per-cell updates of the
/// inhomogeneous solver.
inline void advance_collision_cell(const CollisionKernel& kernel, std::vector<double>& W,
                                   double dt, const HomogeneousStepOptions& opt = {}) {
  if (!(dt > 0)) throw domain_error("kinetic step needs dt > 0");
  std::vector<double> k1, k2, k3, stage, out;
  for (int h = 0; h <= opt.max_halvings; ++h) {
    long nsub = 1L << h;
    double sub = dt / static_cast<double>(nsub);
    std::vector<double> cur = W;
    bool ok = true;
    for (long s = 0; s < nsub && ok; ++s) {
      detail::rk4_collision_step(kernel, cur, sub, out, k1, k2, k3, stage);
      if (opt.clamp) {
        for (double& x : out) x = std::max(0.0, x);
      } else if (!detail::nonnegative(out)) {
        ok = false;
        break;
      }
      cur = out;
    }
    if (ok) {
      W = std::move(cur);
      return;
    }
  }
  throw numerical_error("kinetic step remains negative after maximum dt halvings (stiff rate)");
}

/// One classical RK4 update over exactly dt.
inline WignerState<1> step_homogeneous(const CollisionKernel& kernel, const WignerState<1>& W,
                                       double dt, const HomogeneousStepOptions& opt = {}) {
  if (!(W.grid == kernel.grid)) throw domain_error("state and kernel grids differ");
  std::vector<double> values = W.values;
  advance_collision_cell(kernel, values, dt, opt);
  return WignerState<1>(W.grid, std::move(values));
}

/// Time series of a homogeneous relaxation run with its conserved moments.
struct KineticTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<EntropyValue> entropy_values;
  std::vector<double> energy;  // integral omega W dk
  std::vector<double> number;  // integral W dk
  std::vector<std::string> violations;
  bool pair_only = false;

  double entropy_at(std::size_t i) const { return entropy_values[i].value; }
};

struct SolveOptions {
  bool clamp = false;
  int max_halvings = 20;
  long record_stride = 1;       // record every n-th accepted step
  double entropy_slack = 1e-9;  // relative per-step slack for the H-theorem check
  double moment_drift_tol = 1e-6;
};

/// Integrates dW/dt = C(W) to time T recording snapshots, entropy, energy
/// and number, and reports invariant violations instead of hiding them.
inline KineticTrajectory solve_homogeneous(const CollisionKernel& kernel,
                                           const WignerState<1>& W0, double T, double dt,
                                           const SolveOptions& opt = {}) {
  if (!(T >= 0) || !(dt > 0)) throw domain_error("solver needs T >= 0 and dt > 0");
  if (!(W0.grid == kernel.grid)) throw domain_error("state and kernel grids differ");
  for (double v : W0.values)
    if (v < 0 || !std::isfinite(v)) throw domain_error("initial state must be nonnegative");

  const double dx = kernel.grid.weight();
  KineticTrajectory traj;
  traj.pair_only = kernel.pair_only();
  auto record = [&](double t, const std::vector<double>& W) {
    traj.times.push_back(t);
    traj.states.push_back(W);
    WignerState<1> tmp(kernel.grid, W);
    traj.entropy_values.push_back(entropy(tmp));
    double e = 0, n = 0;
    for (std::size_t i = 0; i < W.size(); ++i) {
      e += kernel.omega[i] * W[i];
      n += W[i];
    }
    traj.energy.push_back(e * dx);
    traj.number.push_back(n * dx);
  };

  std::vector<double> cur = W0.values;
  record(0.0, cur);
  double t = 0;
  std::vector<double> k1, k2, k3, stage, out;
  long accepted = 0;
  while (t < T * (1.0 - 1e-15)) {
    double want = std::min(dt, T - t);
    // attempt the full step, halving on negativity
    double taken = want;
    int h = 0;
    for (;; ++h) {
      detail::rk4_collision_step(kernel, cur, taken, out, k1, k2, k3, stage);
      if (opt.clamp) {
        for (double& x : out) x = std::max(0.0, x);
        break;
      }
      if (detail::nonnegative(out)) break;
      if (h >= opt.max_halvings)
        throw numerical_error("kinetic solver: persistent negativity, stiff collision rate");
      taken *= 0.5;
    }
    cur = out;
    t += taken;
    ++accepted;
    if (accepted % opt.record_stride == 0 || t >= T * (1.0 - 1e-15)) record(t, cur);
  }

  // trajectory invariants: monotone entropy, conserved moments
  for (std::size_t i = 1; i < traj.times.size(); ++i) {
    const auto &sa = traj.entropy_values[i - 1], &sb = traj.entropy_values[i];
    if (sa.finite && sb.finite && sb.value < sa.value - opt.entropy_slack * std::abs(sa.value))
      traj.violations.push_back("entropy decreased at t = " + std::to_string(traj.times[i]));
  }
  double e0 = traj.energy.front(), n0 = traj.number.front();
  for (std::size_t i = 1; i < traj.times.size(); ++i) {
    if (std::abs(traj.energy[i] - e0) > opt.moment_drift_tol * std::max(1e-300, std::abs(e0)))
      traj.violations.push_back("energy drifted at t = " + std::to_string(traj.times[i]));
    if (traj.pair_only &&
        std::abs(traj.number[i] - n0) > opt.moment_drift_tol * std::max(1e-300, std::abs(n0)))
      traj.violations.push_back("number drifted at t = " + std::to_string(traj.times[i]));
  }
  return traj;
}

/// Solves the two moment constraints for the stationary family
/// W = 1/(a + c omega): integral W = number, integral omega W = energy.
struct StationaryFit {
  double a, c;
  int iterations;
};

inline StationaryFit solve_stationary_moments(const MomentumGrid<1>& grid,
                                              const std::vector<double>& omega, double number,
                                              double energy) {
  if (!(number > 0) || !(energy > 0))
    throw domain_error("stationary moments must be positive");
  const double dx = grid.weight();
  const std::size_t n = omega.size();
  double wmin = 1e300;
  for (double w : omega) wmin = std::min(wmin, w);

  double a = 0.0, c = static_cast<double>(n) * dx / energy;  // matches energy at a = 0
  auto moments = [&](double aa, double cc, double& m0, double& m1) {
    m0 = m1 = 0;
    for (double w : omega) {
      double psi = aa + cc * w;
      m0 += 1.0 / psi;
      m1 += w / psi;
    }
    m0 *= dx;
    m1 *= dx;
  };
  int it = 0;
  for (; it < 200; ++it) {
    double m0, m1;
    moments(a, c, m0, m1);
    double f0 = m0 - number, f1 = m1 - energy;
    if (std::abs(f0) <= 1e-13 * number && std::abs(f1) <= 1e-13 * energy) break;
    double j00 = 0, j01 = 0, j11 = 0;
    for (double w : omega) {
      double s = 1.0 / ((a + c * w) * (a + c * w));
      j00 -= s;
      j01 -= w * s;
      j11 -= w * w * s;
    }
    j00 *= dx;
    j01 *= dx;
    j11 *= dx;
    double det = j00 * j11 - j01 * j01;
    if (std::abs(det) < 1e-300) throw numerical_error("singular Jacobian in moment solve");
    double da = (j11 * f0 - j01 * f1) / det;
    double dc = (-j01 * f0 + j00 * f1) / det;
    da = -da;
    dc = -dc;  // Newton direction solves J d = -f
    double step = 1.0;
    while (step > 1e-8 && a + step * da + (c + step * dc) * wmin <= 0) step *= 0.5;
    a += step * da;
    c += step * dc;
  }
  if (it >= 200) throw numerical_error("moment solve failed to converge");
  return {a, c, it};
}

}  // namespace phonon

#endif
