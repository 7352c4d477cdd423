#ifndef PHONON_INVARIANTS_HPP
#define PHONON_INVARIANTS_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "phonon/collision.hpp"
#include "phonon/common.hpp"
#include "phonon/dispersion.hpp"
#include "phonon/grid.hpp"
#include "phonon/kinematics.hpp"

namespace phonon {

/// Candidate collisional invariant psi(k): either a closed form or a grid
/// tabulation with periodic linear interpolation, matching the collision
/// module's interpolation so residuals compose consistently.
class InvariantCandidate {
 public:
  static InvariantCandidate closed_form(std::string name, std::function<double(double)> f) {
    InvariantCandidate c;
    c.name_ = std::move(name);
    c.f_ = std::move(f);
    return c;
  }

  static InvariantCandidate tabulated(std::string name, const MomentumGrid<1>& grid,
                                      std::vector<double> values) {
    if (values.size() != grid.size())
      throw construction_error("tabulated invariant does not match its grid");
    for (double v : values)
      if (!std::isfinite(v)) throw construction_error("tabulated invariant must be finite");
    InvariantCandidate c;
    c.name_ = std::move(name);
    c.grid_.emplace_back(grid);
    c.values_ = std::move(values);
    return c;
  }

  double operator()(double k) const {
    if (f_) return f_(k);
    return interp_periodic(grid_.front(), values_, k);
  }

  const std::string& name() const { return name_; }

 private:
  std::string name_;
  std::function<double(double)> f_;
  std::vector<MomentumGrid<1>> grid_;  // 0 or 1 element
  std::vector<double> values_;
};

namespace detail {

inline double sup_abs(const InvariantCandidate& psi, int dense = 1024) {
  double m = 0;
  for (int i = 0; i < dense; ++i) m = std::max(m, std::abs(psi(-0.5 + i / static_cast<double>(dense))));
  return m;
}

}  // namespace detail

/// Max residual of psi(k1)+psi(k2) = psi(k3)+psi(k4) over the kernel's pair
/// quadruples, normalized by sup|psi|. Zero means psi is invariant on the
/// discrete collision manifold.
inline double pair_invariant_residual(const InvariantCandidate& psi,
                                      const CollisionKernel& kernel) {
  if (kernel.pairs.empty())
    throw domain_error("pair-invariant residual undefined: kernel has no pair entries");
  const auto& grid = kernel.grid;
  const double h = grid.spacing();
  double worst = 0;
  for (const auto& e : kernel.pairs) {
    double k1 = grid.axis_point(static_cast<int>(e.i1));
    double k2 = grid.axis_point(static_cast<int>(e.i2));
    double x3 = wrap_unit(grid.axis_point(static_cast<int>(e.j3)) + e.t3 * h);
    double x4 = wrap_unit(grid.axis_point(static_cast<int>(e.j4)) + e.t4 * h);
    double r = std::abs(psi(k1) + psi(k2) - psi(x3) - psi(x4));
    worst = std::max(worst, r);
  }
  double scale = detail::sup_abs(psi);
  if (scale == 0) return 0;
  return worst / scale;
}

struct MergerResidualReport {
  bool manifold_empty;
  double residual;  // normalized by sup|psi|; 0 when the manifold is empty
  long samples;
};

/// Max residual of psi(k1)+psi(k2)+psi(k3) = psi(k1+k2+k3) over refined
/// merger-manifold samples. An empty manifold is itself a meaningful
/// outcome: merger processes are forbidden for this dispersion.
inline MergerResidualReport merger_invariant_residual(const InvariantCandidate& psi,
                                                      const Dispersion<1>& spec,
                                                      const std::vector<MergerSample>& samples) {
  if (samples.empty()) return {true, 0.0, 0};
  const bool torus = spec.domain() == MomentumDomain::Torus;
  double worst = 0;
  for (const auto& s : samples) {
    double merged = torus ? wrap_unit(s.k1 + s.k2 + s.k3) : s.k1 + s.k2 + s.k3;
    double r = std::abs(psi(s.k1) + psi(s.k2) + psi(s.k3) - psi(merged));
    worst = std::max(worst, r);
  }
  double scale = detail::sup_abs(psi);
  return {false, scale > 0 ? worst / scale : 0.0, static_cast<long>(samples.size())};
}

struct InvariantFit {
  double a, c;
  double residual;  // relative L2 distance of psi to span{1, omega}
};

/// Least-squares projection of psi onto span{1, omega} over the grid.
inline InvariantFit fit_invariant(const InvariantCandidate& psi, const MomentumGrid<1>& grid,
                                  const Dispersion<1>& spec) {
  const std::size_t n = grid.size();
  double s1 = static_cast<double>(n), sw = 0, sww = 0, sp = 0, swp = 0;
  std::vector<double> w(n), p(n);
  for (std::size_t i = 0; i < n; ++i) {
    double k = grid.point(i)[0];
    w[i] = spec.eval(k);
    p[i] = psi(k);
    sw += w[i];
    sww += w[i] * w[i];
    sp += p[i];
    swp += w[i] * p[i];
  }
  double det = s1 * sww - sw * sw;
  double mean = sw / s1, var = sww / s1 - mean * mean;
  if (var <= 1e-24 * std::max(1.0, mean * mean))
    throw domain_error("constant dispersion: the fit basis {1, omega} is collinear");
  InvariantFit fit{};
  fit.a = (sww * sp - sw * swp) / det;
  fit.c = (s1 * swp - sw * sp) / det;
  double num = 0, den = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = p[i] - fit.a - fit.c * w[i];
    num += r * r;
    den += p[i] * p[i];
  }
  fit.residual = den > 0 ? std::sqrt(num / den) : 0.0;
  return fit;
}

/// W = 1/(a + c omega), stationary whenever a + c omega is a positive
/// collisional invariant; rejects nonpositive psi.
inline WignerState<1> stationary_from_invariant(double a, double c,
                                                const MomentumGrid<1>& grid,
                                                const Dispersion<1>& spec) {
  WignerState<1> W(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double psi = a + c * spec.eval(grid.point(i));
    if (!(psi > 0))
      throw domain_error("a + c omega must stay positive on the whole grid");
    W.values[i] = 1.0 / psi;
  }
  return W;
}

}  // namespace phonon

#endif
