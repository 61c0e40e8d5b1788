#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ringscft/grid.hpp"
#include "ringscft/propagator.hpp"
#include "ringscft/scf.hpp"
#include "ringscft/tensors.hpp"

namespace ringscft {

struct EnergyRow {
  double U_en = 0.0, U_ee = 0.0, U_sic = 0.0, U_P = 0.0, U = 0.0;
  double minus_Sc_over_beta = 0.0, minus_St_over_beta = 0.0;
  double F = 0.0, K = 0.0;

  EnergyRow& operator+=(const EnergyRow& o) {
    U_en += o.U_en;
    U_ee += o.U_ee;
    U_sic += o.U_sic;
    U_P += o.U_P;
    U += o.U;
    minus_Sc_over_beta += o.minus_Sc_over_beta;
    minus_St_over_beta += o.minus_St_over_beta;
    F += o.F;
    K += o.K;
    return *this;
  }
};

struct EnergyReport {
  std::vector<EnergyRow> pairs;
  EnergyRow total;
  double beta = 0.0;
  double binding() const { return -total.F; }
};

/// Spectral bilinear forms per pair: U_en = n^T S w_en and half of
/// n^T S w for the e-e, self-interaction and Pauli fields.
inline std::vector<EnergyRow> potential_components(const ScfResult& st, const TensorSet& t) {
  std::vector<EnergyRow> rows(st.pairs.size());
  for (std::size_t mu = 0; mu < st.pairs.size(); ++mu) {
    const Vector Sn = t.S * st.pairs[mu].n;
    EnergyRow& r = rows[mu];
    r.U_en = Sn.dot(st.fields.w_en);
    r.U_ee = 0.5 * Sn.dot(st.fields.w_ee);
    r.U_sic = 0.5 * Sn.dot(st.fields.w_sic[mu]);
    r.U_P = 0.5 * Sn.dot(st.fields.w_P[mu]);
    r.U = r.U_en + r.U_ee + r.U_sic + r.U_P;
  }
  return rows;
}

/// Spectral free energy per pair; the sum is F.
inline std::vector<double> free_energy(const ScfResult& st, const TensorSet& t, double beta) {
  std::vector<double> out;
  for (std::size_t mu = 0; mu < st.pairs.size(); ++mu)
    out.push_back(pair_free_energy(t, st.fields, st.pairs[mu], mu, beta));
  return out;
}

/// K_mu = -(N_mu / 2Q) Tr(L q(beta)), from the factored propagator.
inline double pair_kinetic_energy(const PairState& p, const TensorSet& t) {
  double acc = 0.0;
  for (Eigen::Index a = 0; a < p.eig.D.size(); ++a) {
    if (p.pf.weights[a] == 0.0) continue;
    const auto u = p.eig.U.col(a);
    acc += p.pf.weights[a] * u.dot(t.L * u);
  }
  return -p.N_mu / (2.0 * p.pf.weight_sum) * acc;
}

inline double kinetic_energy(const ScfResult& st, const TensorSet& t) {
  double k = 0.0;
  for (const auto& p : st.pairs) k += pair_kinetic_energy(p, t);
  return k;
}

/// Propagator-route pair density on a QuadGrid, n = N/Q q(r, r, beta),
/// with q kept as a sum over eigenfunctions. Optionally the gradient in
/// spherical components (d/dr, (1/r) d/dtheta, (1/(r sin)) d/dphi) and the
/// scaled diagonal s = q e^{-d_max beta}.
struct GridDensity {
  Matrix n;
  Matrix s;
  Matrix gr, gt, gp;
};

inline GridDensity pair_density_on_grid(const PairState& p, const GridBasis& gb, const QuadGrid& g,
                                        bool gradient = false) {
  const auto nr = static_cast<Eigen::Index>(g.n_radial());
  const auto na = static_cast<Eigen::Index>(g.n_angular());
  GridDensity out;
  out.s = Matrix::Zero(nr, na);
  if (gradient) {
    out.gr = Matrix::Zero(nr, na);
    out.gt = Matrix::Zero(nr, na);
    out.gp = Matrix::Zero(nr, na);
  }
  Vector inv_r(nr);
  for (Eigen::Index k = 0; k < nr; ++k) inv_r[k] = 1.0 / g.r[static_cast<std::size_t>(k)];
  for (Eigen::Index a = 0; a < p.eig.D.size(); ++a) {
    const double w = p.pf.weights[a];
    if (w == 0.0) continue;
    const Vector u = p.eig.U.col(a);
    const Matrix G = gb.radial_table(u);
    const Matrix phi = G * gb.Z;
    out.s.array() += w * phi.array().square();
    if (gradient) {
      const Matrix dphi_r = gb.radial_table(u, true) * gb.Z;
      const Matrix Gr = inv_r.asDiagonal() * G;
      const Matrix dphi_t = Gr * gb.Zth;
      const Matrix dphi_p = Gr * gb.Zph;
      out.gr.array() += 2.0 * w * phi.array() * dphi_r.array();
      out.gt.array() += 2.0 * w * phi.array() * dphi_t.array();
      out.gp.array() += 2.0 * w * phi.array() * dphi_p.array();
    }
  }
  const double scale = p.N_mu / p.pf.weight_sum;
  out.n = scale * out.s;
  if (gradient) {
    out.gr *= scale;
    out.gt *= scale;
    out.gp *= scale;
  }
  return out;
}

struct EntropyTerms {
  double minus_Sc_over_beta = 0.0;
  double minus_St_over_beta = 0.0;
  int clamped_nodes = 0;  // nodes where q(r, r) fell below the log floor
};

inline constexpr double kLogFloor = 1e-300;

/// Real-space entropies of one pair:
///   -S_c/beta = -(1/beta) int n (ln q + beta w),  -S_t/beta = (1/beta) int n ln(n/N).
inline EntropyTerms pair_entropies(const PairState& p, const GridDensity& d, const GridBasis& gb,
                                   const QuadGrid& g, double beta) {
  const Matrix w = gb.evaluate(p.w);
  EntropyTerms out;
  double int_nlnq = 0.0, int_nw = 0.0, int_nlnn = 0.0;
  for (std::size_t k = 0; k < g.n_radial(); ++k) {
    double a1 = 0.0, a2 = 0.0, a3 = 0.0;
    for (std::size_t a = 0; a < g.n_angular(); ++a) {
      const auto ik = static_cast<Eigen::Index>(k), ia = static_cast<Eigen::Index>(a);
      const double n = d.n(ik, ia);
      const double s = d.s(ik, ia);
      a2 += g.wang[a] * n * w(ik, ia);
      if (n < kLogFloor) continue;
      double lnq;
      if (s < kLogFloor) {
        ++out.clamped_nodes;
        lnq = p.pf.shift + std::log(kLogFloor);
      } else {
        lnq = p.pf.shift + std::log(s);
      }
      a1 += g.wang[a] * n * lnq;
      a3 += g.wang[a] * n * std::log(n / p.N_mu);
    }
    int_nlnq += g.wr[k] * a1;
    int_nw += g.wr[k] * a2;
    int_nlnn += g.wr[k] * a3;
  }
  out.minus_Sc_over_beta = -(int_nlnq / beta + int_nw);
  out.minus_St_over_beta = int_nlnn / beta;
  return out;
}

/// Full per-pair and total energy table for a converged state.
inline EnergyReport energy_report(const ScfResult& st, const BasisSet& basis, const TensorSet& t,
                                  const QuadGrid& g, double beta) {
  EnergyReport rep;
  rep.beta = beta;
  rep.pairs = potential_components(st, t);
  const auto F = free_energy(st, t, beta);
  const GridBasis gb(basis, g);
  for (std::size_t mu = 0; mu < st.pairs.size(); ++mu) {
    EnergyRow& r = rep.pairs[mu];
    r.F = F[mu];
    r.K = pair_kinetic_energy(st.pairs[mu], t);
    const GridDensity d = pair_density_on_grid(st.pairs[mu], gb, g);
    const EntropyTerms e = pair_entropies(st.pairs[mu], d, gb, g, beta);
    r.minus_Sc_over_beta = e.minus_Sc_over_beta;
    r.minus_St_over_beta = e.minus_St_over_beta;
    rep.total += r;
  }
  return rep;
}

struct ConstraintRatios {
  double ratio1 = 0.0;  // (3 pi / 4K) [(pi/2) int n^3]^{1/3}
  double ratio2 = 0.0;  // (1/2K) int |grad n|^2 / (4 n)
};

/// Both density-functional bounds from the total density and its analytic
/// gradient on the grid.
inline ConstraintRatios check_constraints(const ScfResult& st, const BasisSet& basis,
                                          const TensorSet& t, const QuadGrid& g) {
  const GridBasis gb(basis, g);
  const auto nr = static_cast<Eigen::Index>(g.n_radial());
  const auto na = static_cast<Eigen::Index>(g.n_angular());
  Matrix n = Matrix::Zero(nr, na), gr = n, gt = n, gp = n;
  for (const auto& p : st.pairs) {
    const GridDensity d = pair_density_on_grid(p, gb, g, true);
    n += d.n;
    gr += d.gr;
    gt += d.gt;
    gp += d.gp;
  }
  const double K = kinetic_energy(st, t);
  const Matrix n3 = n.array().cube().matrix();
  Matrix vw = Matrix::Zero(nr, na);
  for (Eigen::Index k = 0; k < nr; ++k)
    for (Eigen::Index a = 0; a < na; ++a) {
      const double v = n(k, a);
      if (v < kLogFloor) continue;
      vw(k, a) = (gr(k, a) * gr(k, a) + gt(k, a) * gt(k, a) + gp(k, a) * gp(k, a)) / (4.0 * v);
    }
  ConstraintRatios out;
  out.ratio1 = 3.0 * kPi / (4.0 * K) * std::cbrt(0.5 * kPi * g.integrate(n3));
  out.ratio2 = g.integrate(vw) / (2.0 * K);
  return out;
}

/// Densities at arbitrary points (r, theta, phi) from coefficient vectors,
/// n(r) = sum_i n_i f_i(r). Returns one row per pair plus a final total row.
inline Matrix density_on_grid(const BasisSet& basis, const std::vector<Vector>& coeffs,
                              const std::vector<std::array<double, 3>>& points) {
  const auto P = static_cast<Eigen::Index>(coeffs.size());
  Matrix out = Matrix::Zero(P + 1, static_cast<Eigen::Index>(points.size()));
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Vector f = eval_basis(basis, points[k][0], points[k][1], points[k][2]);
    for (Eigen::Index mu = 0; mu < P; ++mu) {
      const double v = coeffs[static_cast<std::size_t>(mu)].dot(f);
      out(mu, static_cast<Eigen::Index>(k)) = v;
      out(P, static_cast<Eigen::Index>(k)) += v;
    }
  }
  return out;
}

/// Propagator-route densities at arbitrary points; same layout.
inline Matrix density_on_grid(const BasisSet& basis, const std::vector<PairState>& pairs,
                              const std::vector<std::array<double, 3>>& points) {
  const auto P = static_cast<Eigen::Index>(pairs.size());
  Matrix out = Matrix::Zero(P + 1, static_cast<Eigen::Index>(points.size()));
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Vector f = eval_basis(basis, points[k][0], points[k][1], points[k][2]);
    for (Eigen::Index mu = 0; mu < P; ++mu) {
      const auto& p = pairs[static_cast<std::size_t>(mu)];
      const double v = eigen_density_at(p.eig, p.pf, p.N_mu, f);
      out(mu, static_cast<Eigen::Index>(k)) = v;
      out(P, static_cast<Eigen::Index>(k)) += v;
    }
  }
  return out;
}

}  // namespace ringscft
