#ifndef PHONON_COMMON_HPP
#define PHONON_COMMON_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace phonon {

/// Momentum on the d-dimensional Brillouin torus [-1/2,1/2)^d,
/// or on truncated continuum momentum space.
template <int D>
using Vec = std::array<double, D>;

inline constexpr double pi = 3.14159265358979323846;

struct domain_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct singular_point_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct construction_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct cost_guard_error : std::runtime_error {
  double estimated_ops;
  cost_guard_error(const std::string& msg, double ops)
      : std::runtime_error(msg), estimated_ops(ops) {}
};

/// Reduce to the fundamental interval [-1/2, 1/2).
inline double wrap_unit(double x) {
  double y = x - std::floor(x + 0.5);
  if (y >= 0.5) y -= 1.0;  // guards floor rounding at the right edge
  return y;
}

template <std::size_t N>
std::array<double, N> wrap_unit(const std::array<double, N>& k) {
  std::array<double, N> r;
  for (std::size_t j = 0; j < N; ++j) r[j] = wrap_unit(k[j]);
  return r;
}

template <std::size_t N>
std::array<double, N> operator+(const std::array<double, N>& a,
                                const std::array<double, N>& b) {
  std::array<double, N> r;
  for (std::size_t j = 0; j < N; ++j) r[j] = a[j] + b[j];
  return r;
}

template <std::size_t N>
std::array<double, N> operator-(const std::array<double, N>& a,
                                const std::array<double, N>& b) {
  std::array<double, N> r;
  for (std::size_t j = 0; j < N; ++j) r[j] = a[j] - b[j];
  return r;
}

template <std::size_t N>
std::array<double, N> operator-(const std::array<double, N>& a) {
  std::array<double, N> r;
  for (std::size_t j = 0; j < N; ++j) r[j] = -a[j];
  return r;
}

template <std::size_t N>
std::array<double, N> operator*(double s, const std::array<double, N>& a) {
  std::array<double, N> r;
  for (std::size_t j = 0; j < N; ++j) r[j] = s * a[j];
  return r;
}

template <std::size_t N>
double norm2sq(const std::array<double, N>& a) {
  double s = 0;
  for (std::size_t j = 0; j < N; ++j) s += a[j] * a[j];
  return s;
}

/// Distance on the unit circle.
inline double circ_dist(double a, double b) { return std::abs(wrap_unit(a - b)); }

}  // namespace phonon

#endif
