#ifndef PHONON_DISPERSION_HPP
#define PHONON_DISPERSION_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "phonon/common.hpp"

namespace phonon {

enum class DispersionKind { OpticalNearestNeighbor, FpuChain1D, NlsQuadratic, CustomElastic };
enum class MomentumDomain { Torus, Continuum };

/// Offset -> elastic coupling, the real-space couplings of the harmonic part.
template <int D>
using CouplingMap = std::vector<std::pair<std::array<int, D>, double>>;

/// A dispersion relation omega(k) on the momentum torus [-1/2,1/2)^D or on
/// truncated continuum momentum space, with its group velocity and the
/// real-space couplings it derives from. Immutable after construction and
/// safe to share across threads.
template <int D>
class Dispersion {
 public:
  static Dispersion optical_nearest_neighbor(double omega0) {
    if (omega0 <= 0) throw construction_error("optical dispersion requires omega0 > 0");
    Dispersion d;
    d.kind_ = DispersionKind::OpticalNearestNeighbor;
    d.domain_ = MomentumDomain::Torus;
    d.omega0_ = omega0;
    d.alpha_ = nearest_neighbor_couplings(omega0);
    return d;
  }

  static Dispersion fpu_chain() requires(D == 1) {
    Dispersion d;
    d.kind_ = DispersionKind::FpuChain1D;
    d.domain_ = MomentumDomain::Torus;
    d.alpha_ = {{{0}, 1.0}, {{1}, -0.5}, {{-1}, -0.5}};  // alphahat = 1 - cos(2 pi k)
    return d;
  }

  static Dispersion nls_quadratic(double cutoff) {
    if (cutoff <= 0) throw construction_error("NLS dispersion requires a positive momentum cutoff");
    Dispersion d;
    d.kind_ = DispersionKind::NlsQuadratic;
    d.domain_ = MomentumDomain::Continuum;
    d.cutoff_ = cutoff;
    return d;
  }

  /// Validates alpha(x) = alpha(-x) and nonnegativity of its Fourier
  /// transform on a dense check grid; rejects with a witness otherwise.
  static Dispersion custom_elastic(const CouplingMap<D>& alpha,
                                   int check_points_per_axis = default_check_points()) {
    Dispersion d;
    d.kind_ = DispersionKind::CustomElastic;
    d.domain_ = MomentumDomain::Torus;
    d.alpha_ = alpha;
    d.validate_couplings(check_points_per_axis);
    return d;
  }

  DispersionKind kind() const { return kind_; }
  MomentumDomain domain() const { return domain_; }
  double omega0() const { return omega0_; }
  double cutoff() const { return cutoff_; }
  const CouplingMap<D>& couplings() const {
    if (kind_ == DispersionKind::NlsQuadratic)
      throw domain_error("NLS dispersion has no lattice couplings");
    return alpha_;
  }

  /// Constant omega: every group velocity vanishes and no phonon transport
  /// or collisions take place.
  bool is_flat() const { return flat_; }

  double operator()(const Vec<D>& k) const { return eval(k); }

  double eval(const Vec<D>& k) const {
    switch (kind_) {
      case DispersionKind::OpticalNearestNeighbor: {
        double s = omega0_ * omega0_;
        for (int j = 0; j < D; ++j) s += 2.0 * (1.0 - std::cos(2.0 * pi * wrap_unit(k[j])));
        return std::sqrt(s);
      }
      case DispersionKind::FpuChain1D:
        return std::sqrt(1.0 - std::cos(2.0 * pi * wrap_unit(k[0])));
      case DispersionKind::NlsQuadratic:
        return 0.5 * norm2sq(k);
      case DispersionKind::CustomElastic: {
        double s = alphahat(k);
        return std::sqrt(std::max(0.0, s));
      }
    }
    return 0.0;
  }

  double eval(double k) const requires(D == 1) { return eval(Vec<1>{k}); }

  /// Transport velocity of a phonon at k: (2 pi)^{-1} grad omega for lattice
  /// dispersions; k itself for the quadratic continuum dispersion.
  Vec<D> group_velocity(const Vec<D>& k) const {
    switch (kind_) {
      case DispersionKind::NlsQuadratic:
        return k;
      case DispersionKind::FpuChain1D:
      case DispersionKind::OpticalNearestNeighbor:
      case DispersionKind::CustomElastic: {
        double w = eval(k);
        if (w < singular_floor_)
          throw singular_point_error("group velocity undefined where omega vanishes");
        Vec<D> v;
        for (int j = 0; j < D; ++j) v[j] = 0.0;
        // (2 pi)^{-1} d omega/dk_j = -sum_x x_j alpha(x) sin(2 pi k.x) / (2 omega)
        for (const auto& [x, a] : alpha_) {
          double phase = 0;
          for (int j = 0; j < D; ++j) phase += k[j] * x[j];
          double s = a * std::sin(2.0 * pi * phase) / (2.0 * w);
          for (int j = 0; j < D; ++j) v[j] -= x[j] * s;
        }
        return v;
      }
    }
    return Vec<D>{};
  }

  double group_velocity(double k) const requires(D == 1) {
    return group_velocity(Vec<1>{k})[0];
  }

  /// Canonical parameter string; keys kernel caches.
  std::string describe() const {
    char buf[64];
    std::string s;
    switch (kind_) {
      case DispersionKind::OpticalNearestNeighbor:
        std::snprintf(buf, sizeof buf, "optical_nn(omega0=%.17g,d=%d)", omega0_, D);
        return buf;
      case DispersionKind::FpuChain1D:
        return "fpu_chain(d=1)";
      case DispersionKind::NlsQuadratic:
        std::snprintf(buf, sizeof buf, "nls_quadratic(d=%d,cutoff=%.17g)", D, cutoff_);
        return buf;
      case DispersionKind::CustomElastic: {
        s = "custom_elastic(d=" + std::to_string(D);
        std::vector<std::pair<std::array<int, D>, double>> sorted(alpha_.begin(), alpha_.end());
        std::sort(sorted.begin(), sorted.end());
        for (const auto& [x, a] : sorted) {
          s += ";";
          for (int j = 0; j < D; ++j) s += std::to_string(x[j]) + (j + 1 < D ? "," : ":");
          std::snprintf(buf, sizeof buf, "%.17g", a);
          s += buf;
        }
        s += ")";
        return s;
      }
    }
    return s;
  }

 private:
  static CouplingMap<D> nearest_neighbor_couplings(double omega0) {
    CouplingMap<D> a;
    std::array<int, D> zero{};
    a.push_back({zero, omega0 * omega0 + 2.0 * D});
    for (int j = 0; j < D; ++j) {
      std::array<int, D> e{};
      e[j] = 1;
      a.push_back({e, -1.0});
      e[j] = -1;
      a.push_back({e, -1.0});
    }
    return a;
  }

  double alphahat(const Vec<D>& k) const {
    double s = 0;
    for (const auto& [x, a] : alpha_) {
      double phase = 0;
      for (int j = 0; j < D; ++j) phase += k[j] * x[j];
      s += a * std::cos(2.0 * pi * phase);
    }
    return s;
  }

  static constexpr int default_check_points() { return D == 1 ? 1024 : 96; }

  void validate_couplings(int check_points) {
    // symmetry alpha(x) = alpha(-x)
    std::map<std::array<int, D>, double> m;
    for (const auto& [x, a] : alpha_) m[x] += a;
    for (const auto& [x, a] : m) {
      std::array<int, D> neg;
      for (int j = 0; j < D; ++j) neg[j] = -x[j];
      auto it = m.find(neg);
      double other = (it == m.end()) ? 0.0 : it->second;
      if (std::abs(a - other) > 1e-12 * (1.0 + std::abs(a))) {
        std::string s = "asymmetric couplings at offset (";
        for (int j = 0; j < D; ++j) s += std::to_string(x[j]) + (j + 1 < D ? "," : ")");
        throw construction_error(s);
      }
    }
    // nonnegativity of the Fourier transform on a dense grid
    double lo = 1e300, hi = -1e300;
    Vec<D> witness{};
    std::array<int, D> idx{};
    long total = 1;
    for (int j = 0; j < D; ++j) total *= check_points;
    for (long t = 0; t < total; ++t) {
      long r = t;
      Vec<D> k;
      for (int j = 0; j < D; ++j) {
        idx[j] = static_cast<int>(r % check_points);
        r /= check_points;
        k[j] = -0.5 + static_cast<double>(idx[j]) / check_points;
      }
      double v = alphahat(k);
      if (v < lo) {
        lo = v;
        witness = k;
      }
      hi = std::max(hi, v);
    }
    if (lo < -1e-12 * std::max(1.0, std::abs(hi))) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "coupling Fourier transform is negative (%.6g) near k = %.6g",
                    lo, witness[0]);
      throw construction_error(buf);
    }
    flat_ = (hi - lo) <= 1e-12 * std::max(1.0, std::abs(hi));
  }

  DispersionKind kind_ = DispersionKind::OpticalNearestNeighbor;
  MomentumDomain domain_ = MomentumDomain::Torus;
  double omega0_ = 1.0;
  double cutoff_ = 0.0;
  bool flat_ = false;
  CouplingMap<D> alpha_;
  static constexpr double singular_floor_ = 1e-9;
};

using Dispersion1 = Dispersion<1>;
using Dispersion3 = Dispersion<3>;

}  // namespace phonon

#endif
