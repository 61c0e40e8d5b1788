#pragma once

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "ringscft/numeric.hpp"

namespace ringscft {

/// Flat index of (l, m) in an l-major table: l*l + l + m.
constexpr int lm_index(int l, int m) { return l * l + l + m; }
constexpr int lm_count(int lmax) { return (lmax + 1) * (lmax + 1); }

/// Normalized associated Legendre functions at a fixed polar angle,
///   Pbar_l^m(cos t) = sqrt((2l+1)/(4pi) (l-m)!/(l+m)!) P_l^m(cos t),
/// with the Condon-Shortley phase carried by P_l^m. Stores 0 <= m <= l.
/// Alongside the values it keeps d/dt Pbar_l^m and Pbar_l^m / sin t (m >= 1),
/// both of which stay finite at the poles.
class LegendreTable {
 public:
  LegendreTable(int lmax, double theta) : lmax_(lmax) {
    if (lmax < 0) throw std::invalid_argument("LegendreTable: lmax < 0");
    const int n = lm_count(lmax);
    value_.assign(n, 0.0);
    dtheta_.assign(n, 0.0);
    over_sin_.assign(n, 0.0);

    const double x = std::cos(theta);
    const double s = std::sin(theta);

    // Unnormalized P_l^m first, also P_l^m / sin for m >= 1.
    std::vector<double> p(n, 0.0), ps(n, 0.0);
    double pmm = 1.0;      // P_m^m
    double pmm_s = 1.0;    // P_m^m / sin, valid for m >= 1
    for (int m = 0; m <= lmax; ++m) {
      if (m > 0) {
        const double f = -(2.0 * m - 1.0);
        pmm_s = (m == 1) ? f * 1.0 : f * s * pmm_s;
        pmm *= f * s;
      }
      at(p, m, m) = pmm;
      if (m > 0) at(ps, m, m) = pmm_s;
      if (m + 1 <= lmax) {
        at(p, m + 1, m) = x * (2.0 * m + 1.0) * pmm;
        if (m > 0) at(ps, m + 1, m) = x * (2.0 * m + 1.0) * pmm_s;
      }
      for (int l = m + 2; l <= lmax; ++l) {
        at(p, l, m) = ((2.0 * l - 1.0) * x * at(p, l - 1, m) -
                       (l + m - 1.0) * at(p, l - 2, m)) / (l - m);
        if (m > 0)
          at(ps, l, m) = ((2.0 * l - 1.0) * x * at(ps, l - 1, m) -
                          (l + m - 1.0) * at(ps, l - 2, m)) / (l - m);
      }
    }

    for (int l = 0; l <= lmax; ++l) {
      for (int m = 0; m <= l; ++m) {
        const double norm = std::sqrt((2.0 * l + 1.0) / kFourPi *
                                      std::exp(std::lgamma(l - m + 1.0) -
                                               std::lgamma(l + m + 1.0)));
        // d/dt P_l^m(cos t) = (P_l^{m+1} - (l+m)(l-m+1) P_l^{m-1}) / 2,
        // which for m = 0 reduces to P_l^1.
        double dp;
        if (m == 0) {
          dp = (l >= 1) ? at(p, l, 1) : 0.0;
        } else {
          const double up = (m + 1 <= l) ? at(p, l, m + 1) : 0.0;
          dp = 0.5 * (up - (l + m) * (l - m + 1.0) * at(p, l, m - 1));
        }
        at(value_, l, m) = norm * at(p, l, m);
        at(dtheta_, l, m) = norm * dp;
        at(over_sin_, l, m) = (m > 0) ? norm * at(ps, l, m) : 0.0;
      }
    }
  }

  int lmax() const { return lmax_; }
  double value(int l, int m) const { return value_[lm_index(l, m)]; }
  double dtheta(int l, int m) const { return dtheta_[lm_index(l, m)]; }
  double over_sin(int l, int m) const { return over_sin_[lm_index(l, m)]; }

 private:
  static double& at(std::vector<double>& v, int l, int m) { return v[lm_index(l, m)]; }
  static double at(const std::vector<double>& v, int l, int m) { return v[lm_index(l, m)]; }

  int lmax_;
  std::vector<double> value_;
  std::vector<double> dtheta_;
  std::vector<double> over_sin_;
};

/// All real spherical harmonics Z_l^m with l <= lmax at one direction, plus
/// the angular pieces of their gradient: dZ/dtheta and (dZ/dphi)/sin(theta).
///
///   Z_l^m = sqrt2 Re Y_l^m             (m > 0)
///         = Y_l^0                      (m = 0)
///         = sqrt2 (-1)^|m| Im Y_l^|m|  (m < 0)
struct RealHarmonics {
  RealHarmonics(int lmax, double theta, double phi)
      : lmax(lmax), value(lm_count(lmax)), dtheta(lm_count(lmax)),
        dphi_over_sin(lm_count(lmax)) {
    const LegendreTable leg(lmax, theta);
    constexpr double kSqrt2 = 1.41421356237309504880;
    for (int l = 0; l <= lmax; ++l) {
      value[lm_index(l, 0)] = leg.value(l, 0);
      dtheta[lm_index(l, 0)] = leg.dtheta(l, 0);
      dphi_over_sin[lm_index(l, 0)] = 0.0;
      for (int m = 1; m <= l; ++m) {
        const double c = std::cos(m * phi), s = std::sin(m * phi);
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        const int ip = lm_index(l, m), in = lm_index(l, -m);
        value[ip] = kSqrt2 * leg.value(l, m) * c;
        dtheta[ip] = kSqrt2 * leg.dtheta(l, m) * c;
        dphi_over_sin[ip] = -kSqrt2 * m * leg.over_sin(l, m) * s;
        value[in] = kSqrt2 * sign * leg.value(l, m) * s;
        dtheta[in] = kSqrt2 * sign * leg.dtheta(l, m) * s;
        dphi_over_sin[in] = kSqrt2 * sign * m * leg.over_sin(l, m) * c;
      }
    }
  }

  double operator()(int l, int m) const { return value[lm_index(l, m)]; }

  int lmax;
  std::vector<double> value;
  std::vector<double> dtheta;
  std::vector<double> dphi_over_sin;
};

/// Real spherical harmonic Z_l^m(theta, phi).
inline double real_sph_harm(int l, int m, double theta, double phi) {
  if (l < 0) throw std::invalid_argument("real_sph_harm: negative l");
  if (std::abs(m) > l) throw std::invalid_argument("real_sph_harm: |m| > l");
  return RealHarmonics(l, theta, phi)(l, m);
}

}  // namespace ringscft
