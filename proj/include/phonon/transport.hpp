#ifndef PHONON_TRANSPORT_HPP
#define PHONON_TRANSPORT_HPP

#include <cmath>
#include <vector>

#include "phonon/common.hpp"
#include "phonon/dispersion.hpp"
#include "phonon/grid.hpp"
#include "phonon/kinetic.hpp"

namespace phonon {

/// Periodic 1D spatial grid of extent R, r_i = i R/Nr; r is measured in
/// mean-free-path units so the kinetic equation is scale free.
struct SpatialGrid {
  double extent;
  int cells;

  SpatialGrid(double R, int Nr) : extent(R), cells(Nr) {
    if (!(R > 0) || Nr < 2) throw construction_error("spatial grid needs R > 0, Nr >= 2");
  }
  double spacing() const { return extent / cells; }
  double point(int i) const { return i * spacing(); }
  bool operator==(const SpatialGrid& o) const {
    return extent == o.extent && cells == o.cells;
  }
};

/// W(r_i, k_j) >= 0 on a periodic spatial grid times a momentum grid,
/// stored row-major in r.
struct PhaseSpaceState {
  SpatialGrid space;
  MomentumGrid<1> momentum;
  std::vector<double> values;

  PhaseSpaceState(const SpatialGrid& s, const MomentumGrid<1>& m, double fill = 0.0)
      : space(s), momentum(m), values(static_cast<std::size_t>(s.cells) * m.size(), fill) {}

  double& at(int ir, std::size_t ik) { return values[static_cast<std::size_t>(ir) * momentum.size() + ik]; }
  double at(int ir, std::size_t ik) const {
    return values[static_cast<std::size_t>(ir) * momentum.size() + ik];
  }

  void validate() const {
    for (double v : values)
      if (v < 0 || !std::isfinite(v)) throw numerical_error("phase-space state must be >= 0");
  }
};

/// Semi-Lagrangian free streaming: W(r,k) <- W(r - v(k) dt, k) with
/// periodic linear interpolation in r; exact whenever the shift is a whole
/// number of cells.
inline PhaseSpaceState free_transport_step(const PhaseSpaceState& state,
                                           const Dispersion<1>& spec, double dt) {
  if (dt == 0.0) return state;
  const int Nr = state.space.cells;
  const std::size_t Nk = state.momentum.size();
  const double h = state.space.spacing();
  PhaseSpaceState out(state.space, state.momentum);
  for (std::size_t ik = 0; ik < Nk; ++ik) {
    double v = spec.group_velocity(state.momentum.point(ik));
    double shift = v * dt / h;  // in cells
    double fl = std::floor(shift);
    double frac = shift - fl;
    if (frac < 1e-9) frac = 0.0;  // snap grid-commensurate shifts
    if (frac > 1.0 - 1e-9) {
      frac = 0.0;
      fl += 1.0;
    }
    long m = static_cast<long>(fl);
    for (int ir = 0; ir < Nr; ++ir) {
      long s0 = (ir - m) % Nr;
      if (s0 < 0) s0 += Nr;
      long s1 = (s0 - 1 + Nr) % Nr;  // r - shift falls between s1 and s0
      out.at(ir, ik) = (1.0 - frac) * state.at(static_cast<int>(s0), ik) +
                       frac * state.at(static_cast<int>(s1), ik);
    }
  }
  return out;
}

struct InhomogeneousTrajectory {
  std::vector<double> times;
  std::vector<PhaseSpaceState> states;
};

/// Strang splitting for the kinetic equation with free streaming: half
/// transport, a full local collision update in every spatial cell, half
/// transport. Second order in dt.
inline InhomogeneousTrajectory solve_inhomogeneous(const CollisionKernel& kernel,
                                                   const Dispersion<1>& spec,
                                                   const PhaseSpaceState& state0, double T,
                                                   double dt, const SolveOptions& opt = {}) {
  if (!(T >= 0) || !(dt > 0)) throw domain_error("solver needs T >= 0 and dt > 0");
  if (!(state0.momentum == kernel.grid))
    throw domain_error("momentum grid does not match the kernel");
  const int Nr = state0.space.cells;
  const std::size_t Nk = state0.momentum.size();

  InhomogeneousTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(state0);
  PhaseSpaceState cur = state0;
  HomogeneousStepOptions cell_opt{opt.clamp, opt.max_halvings};
  std::vector<double> cell(Nk);
  double t = 0;
  long accepted = 0;
  while (t < T * (1.0 - 1e-15)) {
    double step = std::min(dt, T - t);
    cur = free_transport_step(cur, spec, 0.5 * step);
    if (!kernel.pairs.empty() || !kernel.mergers.empty()) {
      for (int ir = 0; ir < Nr; ++ir) {
        for (std::size_t ik = 0; ik < Nk; ++ik) cell[ik] = cur.at(ir, ik);
        advance_collision_cell(kernel, cell, step, cell_opt);
        for (std::size_t ik = 0; ik < Nk; ++ik) cur.at(ir, ik) = cell[ik];
      }
    }
    cur = free_transport_step(cur, spec, 0.5 * step);
    t += step;
    ++accepted;
    if (accepted % opt.record_stride == 0 || t >= T * (1.0 - 1e-15)) {
      traj.times.push_back(t);
      traj.states.push_back(cur);
    }
  }
  return traj;
}

/// Short-time expansion e^{Lt} W0 + int_0^t e^{L(t-s)} C(e^{Ls} W0) ds by
/// the composite midpoint rule; an independent oracle for the split solver
/// with O(t^2) agreement.
inline PhaseSpaceState duhamel_second_order(const CollisionKernel& kernel,
                                            const Dispersion<1>& spec,
                                            const PhaseSpaceState& state0, double t,
                                            int quad_points) {
  if (t < 0 || quad_points < 1) throw domain_error("duhamel needs t >= 0, quad_points >= 1");
  if (!(state0.momentum == kernel.grid))
    throw domain_error("momentum grid does not match the kernel");
  if (t == 0.0) return state0;
  const int Nr = state0.space.cells;
  const std::size_t Nk = state0.momentum.size();

  PhaseSpaceState acc = free_transport_step(state0, spec, t);
  const double h = t / quad_points;
  std::vector<double> cell(Nk), rate;
  for (int j = 0; j < quad_points; ++j) {
    double s = (j + 0.5) * h;
    PhaseSpaceState shifted = free_transport_step(state0, spec, s);
    PhaseSpaceState collided(state0.space, state0.momentum);
    for (int ir = 0; ir < Nr; ++ir) {
      for (std::size_t ik = 0; ik < Nk; ++ik) cell[ik] = shifted.at(ir, ik);
      evaluate_collision_rate(kernel, cell, rate);
      for (std::size_t ik = 0; ik < Nk; ++ik) collided.at(ir, ik) = rate[ik];
    }
    PhaseSpaceState propagated = free_transport_step(collided, spec, t - s);
    for (std::size_t i = 0; i < acc.values.size(); ++i) acc.values[i] += h * propagated.values[i];
  }
  return acc;
}

}  // namespace phonon

#endif
