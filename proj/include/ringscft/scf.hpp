#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ringscft/basis.hpp"
#include "ringscft/numeric.hpp"
#include "ringscft/propagator.hpp"
#include "ringscft/tensors.hpp"

namespace ringscft {

struct ScfConfig {
  int Z = 1;
  double beta = 600.0;
  double g0 = 0.1;
  std::vector<double> g0_per_pair;  // overrides g0 when non-empty
  double mixing = 0.1;
  bool anderson = false;
  int anderson_depth = 5;
  // Anderson engages once the residual falls below this; linear mixing
  // before that lets symmetry-breaking modes grow instead of being
  // extrapolated away.
  double anderson_start = 1e-4;
  double tol = 1e-6;
  int max_iter = 5000;
  double perturb = 1e-3;
  std::uint64_t seed = 12345;
  bool spherical_only = false;
  double eig_threshold = 1e-10;
  int threads = 1;

  void validate() const {
    if (Z < 1 || Z > 10) throw std::invalid_argument("ScfConfig: Z must lie in 1..10");
    if (!(beta > 0.0)) throw std::invalid_argument("ScfConfig: beta must be positive");
    if (!(g0 > 0.0)) throw std::invalid_argument("ScfConfig: g0 must be positive");
    for (double g : g0_per_pair)
      if (!(g > 0.0)) throw std::invalid_argument("ScfConfig: per-pair g0 must be positive");
    if (!(mixing > 0.0 && mixing <= 1.0))
      throw std::invalid_argument("ScfConfig: mixing must lie in (0, 1]");
    if (!(tol > 0.0)) throw std::invalid_argument("ScfConfig: tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("ScfConfig: max_iter must be >= 1");
    if (perturb < 0.0) throw std::invalid_argument("ScfConfig: perturb must be >= 0");
  }
};

/// Occupations: ceil(N/2) pairs of 2, the last holding 1 when N is odd.
inline std::vector<int> assign_pairs(int N) {
  if (N < 1) throw std::invalid_argument("assign_pairs: N must be >= 1");
  std::vector<int> out(static_cast<std::size_t>((N + 1) / 2), 2);
  if (N % 2 == 1) out.back() = 1;
  return out;
}

struct FieldSet {
  Vector w_en;
  Vector w_ee;
  std::vector<Vector> w_sic;
  std::vector<Vector> w_P;
  std::vector<Vector> w_total;
};

struct PairState {
  int N_mu = 2;
  double g0 = 0.1;
  Vector n;  // density coefficients
  Vector w;  // total field coefficients
  PairEig eig;
  PartitionFunction pf;
};

/// w_en = 4 pi Z L^{-1} f(0), on the l = 0 blocks only.
inline Vector build_w_en(const TensorSet& t, const BlockOps& ops, int Z) {
  return ops.solve_laplace(kFourPi * Z * t.f0, /*s_only=*/true);
}

/// w_ee = -4 pi L^{-1} S n_total.
inline Vector build_w_ee(const TensorSet& t, const BlockOps& ops, const Vector& n_total) {
  return -ops.solve_laplace(kFourPi * (t.S * n_total));
}

/// w_sic = (4 pi / N_mu) L^{-1} S n_mu.
inline Vector build_w_sic(const TensorSet& t, const BlockOps& ops, const Vector& n_mu, int N_mu) {
  return ops.solve_laplace(kFourPi * (t.S * n_mu)) / static_cast<double>(N_mu);
}

/// w_P,mu = (1/g0) sum over the other pairs' density coefficients.
inline Vector build_w_pauli(const std::vector<Vector>& n, double g0, std::size_t mu) {
  if (mu >= n.size()) throw std::out_of_range("build_w_pauli: pair index");
  Vector out = Vector::Zero(n[mu].size());
  for (std::size_t g = 0; g < n.size(); ++g)
    if (g != mu) out += n[g];
  return out / g0;
}

inline double pair_g0(const ScfConfig& cfg, std::size_t mu) {
  return mu < cfg.g0_per_pair.size() ? cfg.g0_per_pair[mu] : cfg.g0;
}

inline FieldSet build_fields(const TensorSet& t, const BlockOps& ops, const ScfConfig& cfg,
                             const std::vector<int>& occ, const std::vector<Vector>& n) {
  FieldSet f;
  f.w_en = build_w_en(t, ops, cfg.Z);
  Vector total = Vector::Zero(t.S.rows());
  for (const auto& v : n) total += v;
  // w_ee and every w_sic share one solve on S n_mu, so a lone electron
  // cancels exactly.
  std::vector<Vector> hartree(n.size());
  for (std::size_t mu = 0; mu < n.size(); ++mu) hartree[mu] = ops.solve_laplace(kFourPi * (t.S * n[mu]));
  f.w_ee = Vector::Zero(t.S.rows());
  for (const auto& h : hartree) f.w_ee -= h;
  for (std::size_t mu = 0; mu < n.size(); ++mu) {
    f.w_sic.push_back(hartree[mu] / static_cast<double>(occ[mu]));
    f.w_P.push_back(build_w_pauli(n, pair_g0(cfg, mu), mu));
    f.w_total.push_back(f.w_en + f.w_ee + f.w_sic[mu] + f.w_P[mu]);
  }
  return f;
}

/// Spectral pair free energy -(N/beta) ln Q - 1/2 n^T S (w_P + w_sic + w_ee).
inline double pair_free_energy(const TensorSet& t, const FieldSet& f, const PairState& p,
                               std::size_t mu, double beta) {
  const Vector wi = f.w_P[mu] + f.w_sic[mu] + f.w_ee;
  return -(p.N_mu / beta * p.pf.log_q + 0.5 * p.n.dot(t.S * wi));
}

struct IterationRecord {
  int iter = 0;
  double residual = 0.0;
  double F = 0.0;
  double mixing = 0.0;
};

struct ScfResult {
  std::vector<PairState> pairs;
  FieldSet fields;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  double F = 0.0;
  std::vector<IterationRecord> trace;
  std::vector<std::string> invariant_log;  // test-mode checks, one line each
};

struct SolvedPair {
  PairEig eig;
  PartitionFunction pf;
  Vector n;
};

inline SolvedPair solve_pair(const TensorSet& t, const BlockOps& ops, const Vector& w, int N_mu,
                             double beta) {
  const Matrix A = 0.5 * t.L - contract_field(w, t.gamma);
  SolvedPair s;
  s.eig = generalized_eig(A, ops);
  s.pf = partition_function(s.eig, beta);
  s.n = pair_density(s.eig, s.pf, N_mu, t.gamma, ops);
  return s;
}

/// Starting densities: pair mu is seeded from the mu-th most bound l = 0
/// eigenstate of the bare nuclear field (1s, 2s, ...), then l > 0
/// coefficients get a seeded perturbation from a per-pair stream.
inline std::vector<Vector> initial_state(const ScfConfig& cfg, const BasisSet& basis,
                                         const TensorSet& t, const BlockOps& ops) {
  const auto occ = assign_pairs(cfg.Z);
  const Vector w_en = build_w_en(t, ops, cfg.Z);
  const Matrix A = 0.5 * t.L - contract_field(w_en, t.gamma);
  const PairEig eig = generalized_eig(A, ops);

  std::vector<Eigen::Index> s_states;
  for (Eigen::Index a = 0; a < eig.D.size(); ++a) {
    double w0 = 0.0;
    for (const auto& blk : basis.blocks()) {
      if (blk.l != 0) continue;
      const auto o = static_cast<Eigen::Index>(blk.offset);
      const auto k = static_cast<Eigen::Index>(blk.count);
      const Vector u = eig.U.col(a).segment(o, k);
      w0 += u.dot(t.S.block(o, o, k, k) * u);
    }
    if (w0 > 0.5) s_states.push_back(a);
    if (s_states.size() == occ.size()) break;
  }
  if (s_states.size() < occ.size()) throw NumericalError("initial_state: too few s-like states");

  std::vector<Vector> n(occ.size());
  for (std::size_t mu = 0; mu < occ.size(); ++mu) {
    const Vector u = eig.U.col(s_states[mu]);
    const Matrix q = u * u.transpose();
    n[mu] = ops.apply_pinv(contract_density(q, t.gamma)) * static_cast<double>(occ[mu]);
    if (cfg.perturb > 0.0 && !cfg.spherical_only && basis.max_l() > 0) {
      std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed & 0xffffffffu),
                        static_cast<std::uint32_t>(cfg.seed >> 32), static_cast<std::uint32_t>(mu)};
      std::mt19937_64 rng(seq);
      std::uniform_real_distribution<double> uni(-1.0, 1.0);
      const double amp = cfg.perturb * n[mu].cwiseAbs().maxCoeff();
      for (std::size_t i = 0; i < basis.size(); ++i)
        if (basis.index(i).l > 0) n[mu][static_cast<Eigen::Index>(i)] += amp * uni(rng);
    }
  }
  return n;
}

namespace detail {

/// Anderson mixing over the stacked density vector.
class AndersonMixer {
 public:
  AndersonMixer(int depth, double alpha) : depth_(depth), alpha_(alpha) {}

  Vector next(const Vector& x, const Vector& fx) {
    const Vector r = fx - x;
    if (have_prev_) {
      dx_.push_back(x - x_prev_);
      dr_.push_back(r - r_prev_);
      if (static_cast<int>(dx_.size()) > depth_) {
        dx_.erase(dx_.begin());
        dr_.erase(dr_.begin());
      }
    }
    x_prev_ = x;
    r_prev_ = r;
    have_prev_ = true;
    if (dx_.empty()) return x + alpha_ * r;
    const auto m = static_cast<Eigen::Index>(dx_.size());
    Matrix R(r.size(), m), X(r.size(), m);
    for (Eigen::Index k = 0; k < m; ++k) {
      R.col(k) = dr_[static_cast<std::size_t>(k)];
      X.col(k) = dx_[static_cast<std::size_t>(k)];
    }
    Matrix G = R.transpose() * R;
    G.diagonal().array() += 1e-12 * std::max(1.0, G.diagonal().maxCoeff());
    const Vector gamma = G.ldlt().solve(R.transpose() * r);
    return x + alpha_ * r - (X + alpha_ * R) * gamma;
  }

  void reset() {
    dx_.clear();
    dr_.clear();
    have_prev_ = false;
  }

 private:
  int depth_;
  double alpha_;
  std::vector<Vector> dx_, dr_;
  Vector x_prev_, r_prev_;
  bool have_prev_ = false;
};

}  // namespace detail

/// Observer for test mode, called once per iteration with the freshly
/// solved pairs; returns diagnostic lines and throws on violation.
using InvariantCheck =
    std::function<void(int iter, const std::vector<PairState>&, std::vector<std::string>&)>;

/// Self-consistent loop: fields from n_in, per-pair eigen-solves, new
/// densities n_out, then linear (or Anderson) mixing until
/// max |n_out - n_in| < tol. On exit pairs hold n_out together with the
/// fields and eigenpairs that produced it, sorted by pair free energy.
inline ScfResult scf_iterate(const ScfConfig& cfg, const BasisSet& basis, const TensorSet& t,
                             const BlockOps& ops, std::vector<Vector> n_in = {},
                             const InvariantCheck& check = {}) {
  cfg.validate();
  const auto occ = assign_pairs(cfg.Z);
  const std::size_t P = occ.size();
  if (n_in.empty()) n_in = initial_state(cfg, basis, t, ops);
  if (n_in.size() != P) throw std::invalid_argument("scf_iterate: wrong number of pair densities");

  ScfResult res;
  double alpha = cfg.mixing;
  detail::AndersonMixer anderson(cfg.anderson_depth, cfg.mixing);
  std::vector<double> dF;
  double F_prev = 0.0;
  const auto nb = static_cast<Eigen::Index>(basis.size());

  for (int it = 1; it <= cfg.max_iter; ++it) {
    FieldSet f = build_fields(t, ops, cfg, occ, n_in);
    std::vector<PairState> pairs(P);
    auto work = [&](std::size_t mu) {
      SolvedPair s = solve_pair(t, ops, f.w_total[mu], occ[mu], cfg.beta);
      PairState& p = pairs[mu];
      p.N_mu = occ[mu];
      p.g0 = pair_g0(cfg, mu);
      p.w = f.w_total[mu];
      p.eig = std::move(s.eig);
      p.eig.pair = static_cast<int>(mu);
      p.pf = std::move(s.pf);
      p.n = std::move(s.n);
    };
    if (cfg.threads > 1 && P > 1) {
      std::vector<std::future<void>> jobs;
      for (std::size_t mu = 0; mu < P; ++mu) jobs.push_back(std::async(std::launch::async, work, mu));
      for (auto& j : jobs) j.get();
    } else {
      for (std::size_t mu = 0; mu < P; ++mu) work(mu);
    }

    double residual = 0.0;
    for (std::size_t mu = 0; mu < P; ++mu)
      residual = std::max(residual, (pairs[mu].n - n_in[mu]).cwiseAbs().maxCoeff());
    double F = 0.0;
    for (std::size_t mu = 0; mu < P; ++mu) F += pair_free_energy(t, f, pairs[mu], mu, cfg.beta);
    if (!std::isfinite(F) || !std::isfinite(residual))
      throw NumericalError("scf_iterate: non-finite free energy at iteration " + std::to_string(it));
    res.trace.push_back({it, residual, F, alpha});
    if (check) check(it, pairs, res.invariant_log);

    res.iterations = it;
    res.residual = residual;
    res.F = F;
    if (residual < cfg.tol) {
      res.converged = true;
      res.pairs = std::move(pairs);
      res.fields = std::move(f);
      break;
    }
    if (it == cfg.max_iter) {
      res.pairs = std::move(pairs);
      res.fields = std::move(f);
      break;
    }

    // Halve the step when the free energy keeps changing direction.
    if (it > 1) {
      dF.push_back(F - F_prev);
      if (dF.size() >= 6) {
        int flips = 0;
        for (std::size_t k = dF.size() - 5; k < dF.size(); ++k)
          if (dF[k] * dF[k - 1] < 0.0) ++flips;
        if (flips >= 5 && alpha > 1e-3) {
          alpha *= 0.5;
          dF.clear();
          anderson = detail::AndersonMixer(cfg.anderson_depth, alpha);
        }
      }
    }
    F_prev = F;

    if (cfg.anderson && residual < cfg.anderson_start) {
      Vector x(nb * static_cast<Eigen::Index>(P)), fx(nb * static_cast<Eigen::Index>(P));
      for (std::size_t mu = 0; mu < P; ++mu) {
        x.segment(static_cast<Eigen::Index>(mu) * nb, nb) = n_in[mu];
        fx.segment(static_cast<Eigen::Index>(mu) * nb, nb) = pairs[mu].n;
      }
      const Vector xn = anderson.next(x, fx);
      for (std::size_t mu = 0; mu < P; ++mu) n_in[mu] = xn.segment(static_cast<Eigen::Index>(mu) * nb, nb);
    } else {
      for (std::size_t mu = 0; mu < P; ++mu) n_in[mu] = (1.0 - alpha) * n_in[mu] + alpha * pairs[mu].n;
    }
  }

  // Most bound pair first; fields stay attached to their pair.
  std::vector<std::size_t> order(P);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> Fmu(P);
  for (std::size_t mu = 0; mu < P; ++mu) Fmu[mu] = pair_free_energy(t, res.fields, res.pairs[mu], mu, cfg.beta);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return Fmu[a] < Fmu[b]; });
  std::vector<PairState> sorted;
  FieldSet fs;
  fs.w_en = res.fields.w_en;
  fs.w_ee = res.fields.w_ee;
  for (std::size_t k : order) {
    sorted.push_back(std::move(res.pairs[k]));
    fs.w_sic.push_back(res.fields.w_sic[k]);
    fs.w_P.push_back(res.fields.w_P[k]);
    fs.w_total.push_back(res.fields.w_total[k]);
  }
  res.pairs = std::move(sorted);
  res.fields = std::move(fs);
  return res;
}

}  // namespace ringscft
