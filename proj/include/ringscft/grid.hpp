#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ringscft/basis.hpp"
#include "ringscft/harmonics.hpp"
#include "ringscft/numeric.hpp"

namespace ringscft {

struct GridSpec {
  int n_radial = 400;
  double r_min = 1e-6;
  double r_max = 50.0;
  int n_theta = 32;
  int n_phi = 64;
};

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
    x[static_cast<std::size_t>(i)] = -z;
    x[static_cast<std::size_t>(n - 1 - i)] = z;
    w[static_cast<std::size_t>(i)] = wi;
    w[static_cast<std::size_t>(n - 1 - i)] = wi;
  }
}

/// Product quadrature: log-spaced radial nodes (trapezoid in ln r, so the
/// weights carry r^3) times Gauss-Legendre in cos(theta) times uniform phi.
struct QuadGrid {
  std::vector<double> r, wr;
  std::vector<double> theta, phi, wang;  // flattened angular nodes, weights sum to 4 pi

  explicit QuadGrid(const GridSpec& spec = {}) {
    if (spec.n_radial < 2 || !(spec.r_min > 0.0) || !(spec.r_max > spec.r_min))
      throw std::invalid_argument("QuadGrid: bad radial spec");
    if (spec.n_theta < 1 || spec.n_phi < 1) throw std::invalid_argument("QuadGrid: bad angular spec");
    const double a = std::log(spec.r_min), b = std::log(spec.r_max);
    const double h = (b - a) / (spec.n_radial - 1);
    for (int k = 0; k < spec.n_radial; ++k) {
      const double rk = std::exp(a + h * k);
      r.push_back(rk);
      const double end = (k == 0 || k == spec.n_radial - 1) ? 0.5 : 1.0;
      wr.push_back(end * h * rk * rk * rk);
    }
    std::vector<double> x, w;
    gauss_legendre(spec.n_theta, x, w);
    for (int i = 0; i < spec.n_theta; ++i)
      for (int j = 0; j < spec.n_phi; ++j) {
        theta.push_back(std::acos(x[static_cast<std::size_t>(i)]));
        phi.push_back(2.0 * kPi * j / spec.n_phi);
        wang.push_back(w[static_cast<std::size_t>(i)] * 2.0 * kPi / spec.n_phi);
      }
  }

  std::size_t n_radial() const { return r.size(); }
  std::size_t n_angular() const { return wang.size(); }
  std::size_t size() const { return r.size() * wang.size(); }

  /// Integral of a field stored as (radial x angular).
  double integrate(const Matrix& f) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
      double s = 0.0;
      for (std::size_t a = 0; a < wang.size(); ++a)
        s += wang[a] * f(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(a));
      acc += wr[k] * s;
    }
    return acc;
  }
};

/// Basis factors tabulated on a QuadGrid: radial functions and their
/// derivatives per radial node, harmonics and their angular derivatives per
/// angular node. A basis function is R(:, radial_of(i)) * Z(lm(i), :).
struct GridBasis {
  Matrix R, dR;                // n_radial x radial_size
  Matrix Z, Zth, Zph;          // lm_count x n_angular
  std::vector<int> lm_of;      // per basis function
  std::vector<std::size_t> radial_of;

  GridBasis(const BasisSet& basis, const QuadGrid& g) {
    const auto nr = static_cast<Eigen::Index>(g.n_radial());
    const auto na = static_cast<Eigen::Index>(g.n_angular());
    R.resize(nr, static_cast<Eigen::Index>(basis.radial_size()));
    dR.resizeLike(R);
    for (std::size_t k = 0; k < basis.radial_size(); ++k)
      for (Eigen::Index i = 0; i < nr; ++i) {
        const double r = g.r[static_cast<std::size_t>(i)];
        R(i, static_cast<Eigen::Index>(k)) =
            radial_value(basis.radial_l(k), basis.radial_log_norm(k), basis.radial_exponent(k), r);
        dR(i, static_cast<Eigen::Index>(k)) =
            radial_derivative(basis.radial_l(k), basis.radial_log_norm(k), basis.radial_exponent(k), r);
      }
    const int nlm = lm_count(basis.max_l());
    Z.resize(nlm, na);
    Zth.resizeLike(Z);
    Zph.resizeLike(Z);
    for (Eigen::Index a = 0; a < na; ++a) {
      const RealHarmonics h(basis.max_l(), g.theta[static_cast<std::size_t>(a)],
                            g.phi[static_cast<std::size_t>(a)]);
      for (int q = 0; q < nlm; ++q) {
        Z(q, a) = h.value[static_cast<std::size_t>(q)];
        Zth(q, a) = h.dtheta[static_cast<std::size_t>(q)];
        Zph(q, a) = h.dphi_over_sin[static_cast<std::size_t>(q)];
      }
    }
    for (std::size_t i = 0; i < basis.size(); ++i) {
      lm_of.push_back(lm_index(basis.index(i).l, basis.index(i).m));
      radial_of.push_back(basis.radial_of(i));
    }
  }

  /// Radial coefficient table G(r, lm) = sum_p c_(p,l,m) R_pl(r) of a
  /// coefficient vector; the function on the grid is G * Z.
  Matrix radial_table(const Vector& c, bool derivative = false) const {
    const Matrix& src = derivative ? dR : R;
    Matrix G = Matrix::Zero(src.rows(), Z.rows());
    for (std::size_t i = 0; i < lm_of.size(); ++i) {
      const double ci = c[static_cast<Eigen::Index>(i)];
      if (ci == 0.0) continue;
      G.col(lm_of[i]) += ci * src.col(static_cast<Eigen::Index>(radial_of[i]));
    }
    return G;
  }

  /// Values of sum_i c_i f_i on every node, (radial x angular).
  Matrix evaluate(const Vector& c) const { return radial_table(c) * Z; }
};

}  // namespace ringscft
