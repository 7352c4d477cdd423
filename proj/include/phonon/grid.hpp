#ifndef PHONON_GRID_HPP
#define PHONON_GRID_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "phonon/common.hpp"
#include "phonon/dispersion.hpp"

namespace phonon {

/// Two-point stencil for periodic (or clamped) linear interpolation.
struct LinearStencil {
  std::size_t j0, j1;
  double t;  // value = (1-t) v[j0] + t v[j1]
};

/// Uniform discretization of the Brillouin zone, k_i = -1/2 + i/N per axis,
/// or of the truncated continuum box [-cutoff, cutoff) with the analogous
/// pattern. Carries the quadrature weight of one cell.
template <int D>
class MomentumGrid {
 public:
  MomentumGrid(int points_per_axis, MomentumDomain domain = MomentumDomain::Torus,
               double cutoff = 0.5)
      : n_(points_per_axis), domain_(domain), half_(cutoff) {
    if (n_ < 4 || n_ % 2 != 0)
      throw construction_error("momentum grid needs N >= 4 even points per axis");
    if (domain_ == MomentumDomain::Torus) half_ = 0.5;
    if (half_ <= 0) throw construction_error("momentum cutoff must be positive");
    size_ = 1;
    for (int j = 0; j < D; ++j) size_ *= static_cast<std::size_t>(n_);
  }

  int points_per_axis() const { return n_; }
  std::size_t size() const { return size_; }
  MomentumDomain domain() const { return domain_; }
  double cutoff() const { return half_; }
  double spacing() const { return 2.0 * half_ / n_; }
  double weight() const { return std::pow(spacing(), D); }

  double axis_point(int i) const { return -half_ + i * spacing(); }

  Vec<D> point(std::size_t flat) const {
    Vec<D> k;
    for (int j = 0; j < D; ++j) {
      k[j] = axis_point(static_cast<int>(flat % n_));
      flat /= n_;
    }
    return k;
  }

  std::size_t flatten(const std::array<int, D>& idx) const {
    std::size_t f = 0;
    for (int j = D - 1; j >= 0; --j) f = f * n_ + static_cast<std::size_t>(idx[j]);
    return f;
  }

  /// Torus index arithmetic: momenta add mod 1, so index sums wrap mod N.
  int wrap_index(long i) const {
    long m = i % n_;
    return static_cast<int>(m < 0 ? m + n_ : m);
  }

  /// Interpolation stencil in one axis coordinate. Periodic on the torus;
  /// on the continuum box the caller must keep x inside the domain.
  LinearStencil locate(double x) const {
    double h = spacing();
    if (domain_ == MomentumDomain::Torus) {
      double u = (wrap_unit(x) + half_) / h;
      long j = static_cast<long>(std::floor(u));
      double t = u - static_cast<double>(j);
      int j0 = wrap_index(j);
      int j1 = wrap_index(j + 1);
      return {static_cast<std::size_t>(j0), static_cast<std::size_t>(j1), t};
    }
    double u = (x + half_) / h;
    long j = static_cast<long>(std::floor(u));
    if (j < 0 || j >= n_) throw domain_error("momentum outside the continuum cutoff box");
    if (j == n_ - 1) return {static_cast<std::size_t>(n_ - 1), static_cast<std::size_t>(n_ - 1), 0.0};
    return {static_cast<std::size_t>(j), static_cast<std::size_t>(j + 1), u - static_cast<double>(j)};
  }

  bool in_domain(double x) const {
    if (domain_ == MomentumDomain::Torus) return true;
    return x >= -half_ && x < half_ - 0.5 * spacing() + spacing();  // [-c, c)
  }

  bool operator==(const MomentumGrid& o) const {
    return n_ == o.n_ && domain_ == o.domain_ && half_ == o.half_;
  }

 private:
  int n_;
  MomentumDomain domain_;
  double half_;
  std::size_t size_;
};

using Grid1 = MomentumGrid<1>;
using Grid3 = MomentumGrid<3>;

/// Nonnegative phonon occupation function sampled on a momentum grid.
template <int D>
struct WignerState {
  MomentumGrid<D> grid;
  std::vector<double> values;

  WignerState(const MomentumGrid<D>& g, double fill = 0.0)
      : grid(g), values(g.size(), fill) {}
  WignerState(const MomentumGrid<D>& g, std::vector<double> v)
      : grid(g), values(std::move(v)) {
    if (values.size() != grid.size())
      throw construction_error("Wigner state size does not match its grid");
  }

  void validate() const {
    for (double w : values)
      if (!(w >= 0.0) || !std::isfinite(w))
        throw numerical_error("Wigner state must be nonnegative and finite");
  }
};

using Wigner1 = WignerState<1>;
using Wigner3 = WignerState<3>;

/// Periodic linear interpolation of a grid field (1D).
inline double interp_periodic(const MomentumGrid<1>& grid, const std::vector<double>& v,
                              double x) {
  LinearStencil s = grid.locate(x);
  return (1.0 - s.t) * v[s.j0] + s.t * v[s.j1];
}

inline std::vector<double> sample_omega(const MomentumGrid<1>& grid,
                                        const Dispersion<1>& disp) {
  std::vector<double> w(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) w[i] = disp.eval(grid.point(i));
  return w;
}

}  // namespace phonon

#endif
