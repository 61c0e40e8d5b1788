#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "ringscft/basis.hpp"
#include "ringscft/numeric.hpp"
#include "ringscft/tensors.hpp"

namespace ringscft {

/// Generalized eigenpairs A U = S U diag(D) on the retained subspace, with
/// D in descending order (D(0) is the most bound state).
struct PairEig {
  Matrix U;
  Vector D;
  int pair = 0;
};

/// Per-channel factorizations shared by every pair: the canonical
/// orthogonalizer X = V s^{-1/2} of S and the Cholesky factor of -L.
/// Blocks with equal l share both, so one factorization per channel.
class BlockOps {
 public:
  BlockOps() = default;

  BlockOps(const BasisSet& basis, const TensorSet& t, double threshold = 1e-10)
      : basis_(&basis), threshold_(threshold) {
    const auto& chans = basis.channels();
    std::vector<Eigen::SelfAdjointEigenSolver<Matrix>> eig(chans.size());
    double smax = 0.0;
    for (std::size_t c = 0; c < chans.size(); ++c) {
      const BasisBlock* blk = basis.find_block(chans[c].l, 0);
      const auto o = static_cast<Eigen::Index>(blk->offset);
      const auto k = static_cast<Eigen::Index>(blk->count);
      eig[c].compute(t.S.block(o, o, k, k));
      if (eig[c].info() != Eigen::Success) throw NumericalError("BlockOps: S eigensolve failed");
      smax = std::max(smax, eig[c].eigenvalues().maxCoeff());
    }
    x_.resize(chans.size());
    chol_.resize(chans.size());
    for (std::size_t c = 0; c < chans.size(); ++c) {
      const Vector& s = eig[c].eigenvalues();
      if (s.minCoeff() < -1e-8 * smax)
        throw NumericalError("BlockOps: overlap has negative eigenvalue " + std::to_string(s.minCoeff()));
      std::vector<Eigen::Index> keep;
      for (Eigen::Index a = 0; a < s.size(); ++a)
        if (s[a] >= threshold * smax) keep.push_back(a);
      Matrix X(s.size(), static_cast<Eigen::Index>(keep.size()));
      for (std::size_t a = 0; a < keep.size(); ++a)
        X.col(static_cast<Eigen::Index>(a)) =
            eig[c].eigenvectors().col(keep[a]) / std::sqrt(s[keep[a]]);
      x_[c] = std::move(X);

      const BasisBlock* blk = basis.find_block(chans[c].l, 0);
      const auto o = static_cast<Eigen::Index>(blk->offset);
      const auto k = static_cast<Eigen::Index>(blk->count);
      chol_[c].compute(-t.L.block(o, o, k, k));
      if (chol_[c].info() != Eigen::Success)
        throw NumericalError("BlockOps: Laplace block for l=" + std::to_string(chans[c].l) +
                             " is singular");
    }

    kept_ = 0;
    for (const auto& blk : basis.blocks()) kept_ += static_cast<Eigen::Index>(x_[blk.channel].cols());
    if (kept_ == 0) throw NumericalError("BlockOps: every overlap eigenvalue discarded");
    X_ = Matrix::Zero(static_cast<Eigen::Index>(basis.size()), kept_);
    Eigen::Index col = 0;
    for (const auto& blk : basis.blocks()) {
      const Matrix& Xc = x_[blk.channel];
      X_.block(static_cast<Eigen::Index>(blk.offset), col, Xc.rows(), Xc.cols()) = Xc;
      col += Xc.cols();
    }
  }

  double threshold() const { return threshold_; }
  const Matrix& X() const { return X_; }
  Eigen::Index kept() const { return kept_; }

  /// S^+ b = X X^T b, blockwise.
  Vector apply_pinv(const Vector& b) const {
    Vector out = Vector::Zero(b.size());
    for (const auto& blk : basis_->blocks()) {
      const auto o = static_cast<Eigen::Index>(blk.offset);
      const auto k = static_cast<Eigen::Index>(blk.count);
      const Matrix& Xc = x_[blk.channel];
      out.segment(o, k) = Xc * (Xc.transpose() * b.segment(o, k));
    }
    return out;
  }

  /// x = L^{-1} b blockwise; with s_only the l > 0 blocks are left at zero.
  Vector solve_laplace(const Vector& b, bool s_only = false) const {
    Vector out = Vector::Zero(b.size());
    for (const auto& blk : basis_->blocks()) {
      if (s_only && blk.l != 0) continue;
      const auto o = static_cast<Eigen::Index>(blk.offset);
      const auto k = static_cast<Eigen::Index>(blk.count);
      out.segment(o, k) = -chol_[blk.channel].solve(b.segment(o, k));
    }
    return out;
  }

 private:
  const BasisSet* basis_ = nullptr;
  double threshold_ = 1e-10;
  std::vector<Matrix> x_;
  std::vector<Eigen::LLT<Matrix>> chol_;
  Matrix X_;
  Eigen::Index kept_ = 0;
};

namespace detail {
inline PairEig finish_eig(const Matrix& X, const Matrix& A) {
  const Matrix H = X.transpose() * A * X;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (H + H.transpose()));
  if (es.info() != Eigen::Success) throw NumericalError("generalized_eig: eigensolve failed");
  const Eigen::Index k = H.rows();
  PairEig out;
  out.D.resize(k);
  out.U.resize(X.rows(), k);
  const Matrix U = X * es.eigenvectors();
  for (Eigen::Index a = 0; a < k; ++a) {
    out.D[a] = es.eigenvalues()[k - 1 - a];
    out.U.col(a) = U.col(k - 1 - a);
  }
  if (!out.D.allFinite() || !out.U.allFinite())
    throw NumericalError("generalized_eig: non-finite eigenpairs");
  return out;
}
}  // namespace detail

/// Canonical-orthogonalization solve of A U = S U D for a generic SPD S.
inline PairEig generalized_eig(const Matrix& A, const Matrix& S, double threshold = 1e-10) {
  if (A.rows() != A.cols() || S.rows() != S.cols() || A.rows() != S.rows())
    throw std::invalid_argument("generalized_eig: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  if (es.info() != Eigen::Success) throw NumericalError("generalized_eig: S eigensolve failed");
  const Vector& s = es.eigenvalues();
  const double smax = s.maxCoeff();
  if (!(smax > 0.0)) throw NumericalError("generalized_eig: S is not positive definite");
  if (s.minCoeff() < -1e-8 * smax)
    throw NumericalError("generalized_eig: S has a negative eigenvalue");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index a = 0; a < s.size(); ++a)
    if (s[a] >= threshold * smax) keep.push_back(a);
  if (keep.empty()) throw NumericalError("generalized_eig: every eigenvalue discarded");
  Matrix X(S.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t a = 0; a < keep.size(); ++a)
    X.col(static_cast<Eigen::Index>(a)) = es.eigenvectors().col(keep[a]) / std::sqrt(s[keep[a]]);
  return detail::finish_eig(X, A);
}

/// Same solve with a precomputed orthogonalizer.
inline PairEig generalized_eig(const Matrix& A, const BlockOps& ops) {
  return detail::finish_eig(ops.X(), A);
}

/// Q = sum_a exp(d_a beta) in log-sum-exp form.
struct PartitionFunction {
  double log_q = 0.0;
  double shift = 0.0;       // d_max * beta
  Vector weights;           // exp((d_a - d_max) beta), zeroed below 1e-16
  double weight_sum = 0.0;  // sum of weights (all terms, before dropping)

  double Q() const { return std::exp(log_q); }
};

inline constexpr double kWeightCutoff = 1e-16;

inline PartitionFunction partition_function(const Vector& D, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("partition_function: beta must be positive");
  if (D.size() == 0) throw std::invalid_argument("partition_function: empty spectrum");
  PartitionFunction pf;
  const double dmax = D.maxCoeff();
  pf.shift = dmax * beta;
  pf.weights.resize(D.size());
  double sum = 0.0;
  for (Eigen::Index a = 0; a < D.size(); ++a) {
    const double w = std::exp((D[a] - dmax) * beta);
    sum += w;
    pf.weights[a] = w < kWeightCutoff ? 0.0 : w;
  }
  pf.weight_sum = sum;
  pf.log_q = pf.shift + std::log(sum);
  return pf;
}

inline PartitionFunction partition_function(const PairEig& eig, double beta) {
  return partition_function(eig.D, beta);
}

/// q(beta) scaled by exp(-d_max beta): sum_a w_a u_a u_a^T.
inline Matrix scaled_propagator(const PairEig& eig, const PartitionFunction& pf) {
  const auto n = eig.U.rows();
  Matrix q = Matrix::Zero(n, n);
  for (Eigen::Index a = 0; a < eig.D.size(); ++a) {
    const double w = pf.weights[a];
    if (w == 0.0) continue;
    q.selfadjointView<Eigen::Lower>().rankUpdate(eig.U.col(a), w);
  }
  return q.selfadjointView<Eigen::Lower>();
}

/// n = (N / Q) S^+ Gamma q(beta).
inline Vector pair_density(const PairEig& eig, const PartitionFunction& pf, double N_mu,
                           const GammaTensor& gamma, const BlockOps& ops) {
  const Matrix q = scaled_propagator(eig, pf);
  Vector n = ops.apply_pinv(contract_density(q, gamma)) * (N_mu / pf.weight_sum);
  if (!n.allFinite()) throw NumericalError("pair_density: non-finite density coefficients");
  return n;
}

/// Generic-S variant; the pseudo-inverse comes from canonical orthogonalization.
inline Vector pair_density(const PairEig& eig, double beta, double N_mu, const GammaTensor& gamma,
                           const Matrix& S, double threshold = 1e-10) {
  const PartitionFunction pf = partition_function(eig, beta);
  const Matrix q = scaled_propagator(eig, pf);
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  const Vector& s = es.eigenvalues();
  const double smax = s.maxCoeff();
  Vector sinv = Vector::Zero(s.size());
  for (Eigen::Index a = 0; a < s.size(); ++a)
    if (s[a] >= threshold * smax) sinv[a] = 1.0 / s[a];
  const Matrix Sp = es.eigenvectors() * sinv.asDiagonal() * es.eigenvectors().transpose();
  Vector n = Sp * contract_density(q, gamma) * (N_mu / pf.weight_sum);
  if (!n.allFinite()) throw NumericalError("pair_density: non-finite density coefficients");
  return n;
}

/// Tr(S q(beta)) / Q - 1, which vanishes when U^T S U = I.
inline double trace_identity_error(const PairEig& eig, const PartitionFunction& pf, const Matrix& S) {
  double tr = 0.0;
  for (Eigen::Index a = 0; a < eig.D.size(); ++a) {
    if (pf.weights[a] == 0.0) continue;
    tr += pf.weights[a] * eig.U.col(a).dot(S * eig.U.col(a));
  }
  return tr / pf.weight_sum - 1.0;
}

/// Propagator-route density N/Q f(r)^T q(beta) f(r) at one point.
inline double propagator_density_at(const Matrix& q_scaled, double weight_sum, double N_mu,
                                    const Vector& f) {
  return N_mu / weight_sum * f.dot(q_scaled * f);
}

/// Eigenfunction-route density N/Q sum_a exp(d_a beta) phi_a(r)^2.
inline double eigen_density_at(const PairEig& eig, const PartitionFunction& pf, double N_mu,
                               const Vector& f) {
  double acc = 0.0;
  for (Eigen::Index a = 0; a < eig.D.size(); ++a) {
    if (pf.weights[a] == 0.0) continue;
    const double phi = eig.U.col(a).dot(f);
    acc += pf.weights[a] * phi * phi;
  }
  return N_mu / pf.weight_sum * acc;
}

/// Largest |propagator route - eigenfunction route| over sample points,
/// each given as (r, theta, phi).
inline double ks_consistency(const PairEig& eig, double beta, double N_mu, const BasisSet& basis,
                             const std::vector<std::array<double, 3>>& points) {
  const PartitionFunction pf = partition_function(eig, beta);
  const Matrix q = scaled_propagator(eig, pf);
  double worst = 0.0;
  for (const auto& p : points) {
    const Vector f = eval_basis(basis, p[0], p[1], p[2]);
    const double a = propagator_density_at(q, pf.weight_sum, N_mu, f);
    const double b = eigen_density_at(eig, pf, N_mu, f);
    worst = std::max(worst, std::abs(a - b));
  }
  return worst;
}

}  // namespace ringscft
