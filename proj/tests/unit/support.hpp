#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/spherical_harmonic.hpp>

#include "ringscft/ringscft.hpp"

namespace ringscft::testing {

// Independent oracles: Boost quadrature and Boost spherical harmonics.

inline std::complex<double> oracle_ylm(int l, int m, double theta, double phi) {
  return boost::math::spherical_harmonic(static_cast<unsigned>(l), m, theta, phi);
}

// Real harmonics from the complex ones: sqrt2 Re Y_l^m for m > 0,
// sqrt2 (-1)^m Im Y_l^|m| for m < 0.
inline double oracle_real_ylm(int l, int m, double theta, double phi) {
  if (m == 0) return oracle_ylm(l, 0, theta, phi).real();
  if (m > 0) return std::sqrt(2.0) * oracle_ylm(l, m, theta, phi).real();
  const double sign = (-m) % 2 == 0 ? 1.0 : -1.0;
  return std::sqrt(2.0) * sign * oracle_ylm(l, -m, theta, phi).imag();
}

// Gauss-Legendre in cos(theta) times a uniform phi rule; exact for
// products of harmonics with total degree below 32.
inline double sphere_integral(const std::function<double(double, double)>& f) {
  constexpr int nphi = 32;
  auto ring = [&](double x) {
    const double th = std::acos(x);
    double s = 0.0;
    for (int j = 0; j < nphi; ++j) s += f(th, 2.0 * M_PI * j / nphi);
    return s * 2.0 * M_PI / nphi;
  };
  return boost::math::quadrature::gauss<double, 30>::integrate(ring, -1.0, 1.0);
}

inline double half_line_integral(const std::function<double(double)>& f) {
  boost::math::quadrature::exp_sinh<double> q;
  return q.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-14);
}

inline double oracle_norm(int l, double c) {
  const double I = half_line_integral([&](double r) {
    return 2.0 * c * r * r > 700.0 ? 0.0 : std::pow(r, 2 * l + 2) * std::exp(-2.0 * c * r * r);
  });
  return 1.0 / std::sqrt(I);
}

// Zero once the Gaussian underflows, so r -> inf gives 0 rather than inf * 0.
inline double oracle_radial(int l, double c, double r) {
  if (c * r * r > 700.0) return 0.0;
  return oracle_norm(l, c) * std::pow(r, l) * std::exp(-c * r * r);
}

inline double oracle_radial_d(int l, double c, double r) {
  if (c * r * r > 700.0) return 0.0;
  const double lead = l == 0 ? 0.0 : l * std::pow(r, l - 1);
  return oracle_norm(l, c) * (lead - 2.0 * c * std::pow(r, l + 1)) * std::exp(-c * r * r);
}

// Twelve functions over l = 0..2: four s, one p shell, one d shell.
inline BasisSet oracle_basis() {
  return BasisSet({{0, 4, 0.3, 8.0, {}}, {1, 1, 0.7, 0.7, {}}, {2, 1, 1.3, 1.3, {}}});
}

inline RunConfig desk_config(const std::string& element, bool spherical = false) {
  RunConfig c;
  c.element = element;
  c.scf.anderson = true;
  c.scf.spherical_only = spherical;
  return c;
}

// Converged desk-basis runs, computed once per process.
inline const RunOutcome& desk_run(const std::string& element, bool spherical = false) {
  static std::map<std::pair<std::string, bool>, RunOutcome> cache;
  const auto key = std::make_pair(element, spherical);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, run_element(desk_config(element, spherical))).first;
  return it->second;
}

inline const BasisSet& desk_basis() {
  static const BasisSet b(basis_preset("desk"));
  return b;
}

inline const TensorSet& desk_tensors() {
  static const TensorSet t = assemble_tensors(desk_basis());
  return t;
}

}  // namespace ringscft::testing
