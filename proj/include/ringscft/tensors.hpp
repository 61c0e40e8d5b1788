#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ringscft/angular.hpp"
#include "ringscft/basis.hpp"
#include "ringscft/numeric.hpp"

namespace ringscft {

/// One stored Gamma entry with canonical index order i <= j <= k.
struct GammaEntry {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  std::uint32_t k = 0;
  double value = 0.0;
};

/// Totally symmetric rank-3 tensor kept as canonical triples, sorted by
/// (i, j, k). Reads expand the permutations.
class GammaTensor {
 public:
  GammaTensor() = default;
  GammaTensor(std::size_t dim, std::vector<GammaEntry> entries)
      : dim_(dim), entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(), [](const GammaEntry& a, const GammaEntry& b) {
      if (a.i != b.i) return a.i < b.i;
      if (a.j != b.j) return a.j < b.j;
      return a.k < b.k;
    });
  }

  std::size_t dim() const { return dim_; }
  std::size_t nnz() const { return entries_.size(); }
  const std::vector<GammaEntry>& entries() const { return entries_; }

  /// Gamma_ijk for any index order (binary search over canonical storage).
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    std::uint32_t a[3] = {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                          static_cast<std::uint32_t>(k)};
    std::sort(a, a + 3);
    const GammaEntry key{a[0], a[1], a[2], 0.0};
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                               [](const GammaEntry& x, const GammaEntry& y) {
                                 if (x.i != y.i) return x.i < y.i;
                                 if (x.j != y.j) return x.j < y.j;
                                 return x.k < y.k;
                               });
    if (it == entries_.end() || it->i != a[0] || it->j != a[1] || it->k != a[2]) return 0.0;
    return it->value;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<GammaEntry> entries_;
};

/// Matrices and tensor of the spectral equations for one basis.
struct TensorSet {
  Matrix S;
  Matrix L;
  GammaTensor gamma;
  Vector f0;
};

/// S_ij = N N' Gamma((l+l'+3)/2) / (2 (c+c')^{(l+l'+3)/2}) for equal (l, m).
inline Matrix assemble_overlap(const BasisSet& basis) {
  const auto n = static_cast<Eigen::Index>(basis.size());
  Matrix S = Matrix::Zero(n, n);
  for (const auto& blk : basis.blocks()) {
    const double a = blk.l + 1.5;
    const double lg = std::lgamma(a);
    for (std::size_t x = 0; x < blk.count; ++x) {
      const std::size_t i = blk.offset + x;
      S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
      for (std::size_t y = x + 1; y < blk.count; ++y) {
        const std::size_t j = blk.offset + y;
        const double c = basis.exponent(i) + basis.exponent(j);
        const double v = std::exp(basis.log_norm(i) + basis.log_norm(j) + lg - std::log(2.0) -
                                  a * std::log(c));
        S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        S(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
      }
    }
  }
  return S;
}

/// L_ij = [2 c_i / (c_i + c_j)] [c_i (l - l') - c_j (2l + 3)] S_ji, taken
/// verbatim over every ordered pair and then averaged with its transpose.
/// Throws NumericalError if the verbatim matrix is asymmetric beyond 1e-10.
inline Matrix assemble_laplace(const BasisSet& basis, const Matrix& S) {
  const auto n = static_cast<Eigen::Index>(basis.size());
  Matrix L = Matrix::Zero(n, n);
  for (const auto& blk : basis.blocks()) {
    for (std::size_t x = 0; x < blk.count; ++x)
      for (std::size_t y = 0; y < blk.count; ++y) {
        const auto i = static_cast<Eigen::Index>(blk.offset + x);
        const auto j = static_cast<Eigen::Index>(blk.offset + y);
        const double ci = basis.exponent(blk.offset + x), cj = basis.exponent(blk.offset + y);
        const int l = blk.l, lp = blk.l;
        L(i, j) = 2.0 * ci / (ci + cj) * (ci * (l - lp) - cj * (2.0 * l + 3.0)) * S(j, i);
      }
  }
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double scale = std::max(std::abs(L(i, j)), std::abs(L(j, i)));
      if (scale > 0.0) worst = std::max(worst, std::abs(L(i, j) - L(j, i)) / scale);
    }
  if (worst > 1e-10)
    throw NumericalError("assemble_laplace: asymmetry " + std::to_string(worst));
  return 0.5 * (L + L.transpose());
}

inline Matrix assemble_laplace(const BasisSet& basis) {
  return assemble_laplace(basis, assemble_overlap(basis));
}

/// Gamma_ijk = alpha N N' N'' Gamma((L+3)/2) / (2 (c+c'+c'')^{(L+3)/2}),
/// L = l + l' + l''. Only (l, m) triples with nonzero alpha are visited.
inline GammaTensor assemble_gamma(const BasisSet& basis, const RealGauntTable& table) {
  if (table.max_l() < basis.max_l())
    throw std::invalid_argument("assemble_gamma: Gaunt table l_max below basis l_max");
  const auto& blocks = basis.blocks();
  std::vector<GammaEntry> out;
  const double log2 = std::log(2.0);
  for (std::size_t b1 = 0; b1 < blocks.size(); ++b1)
    for (std::size_t b2 = b1; b2 < blocks.size(); ++b2)
      for (std::size_t b3 = b2; b3 < blocks.size(); ++b3) {
        const auto &A = blocks[b1], &B = blocks[b2], &C = blocks[b3];
        const double alpha = table(A.l, A.m, B.l, B.m, C.l, C.m);
        if (alpha == 0.0) continue;
        const double h = 0.5 * (A.l + B.l + C.l + 3);
        const double lg = std::lgamma(h) - log2;
        for (std::size_t x = 0; x < A.count; ++x) {
          const std::size_t i = A.offset + x;
          for (std::size_t y = (b2 == b1 ? x : 0); y < B.count; ++y) {
            const std::size_t j = B.offset + y;
            for (std::size_t z = (b3 == b2 ? y : 0); z < C.count; ++z) {
              const std::size_t k = C.offset + z;
              const double c = basis.exponent(i) + basis.exponent(j) + basis.exponent(k);
              const double v = alpha * std::exp(basis.log_norm(i) + basis.log_norm(j) +
                                                basis.log_norm(k) + lg - h * std::log(c));
              out.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                             static_cast<std::uint32_t>(k), v});
            }
          }
        }
      }
  return GammaTensor(basis.size(), std::move(out));
}

/// M_ij = sum_k w_k Gamma_ijk.
inline Matrix contract_field(const Vector& w, const GammaTensor& g) {
  const auto n = static_cast<Eigen::Index>(g.dim());
  if (w.size() != n) throw std::invalid_argument("contract_field: dimension mismatch");
  Matrix M = Matrix::Zero(n, n);
  for (const auto& e : g.entries()) {
    const Eigen::Index i = e.i, j = e.j, k = e.k;
    const double v = e.value;
    if (i == j && j == k) {
      M(i, i) += w[i] * v;
    } else if (i == j) {
      M(i, i) += w[k] * v;
      M(i, k) += w[i] * v;
      M(k, i) += w[i] * v;
    } else if (j == k) {
      M(j, j) += w[i] * v;
      M(i, j) += w[j] * v;
      M(j, i) += w[j] * v;
    } else {
      M(i, j) += w[k] * v;
      M(j, i) += w[k] * v;
      M(i, k) += w[j] * v;
      M(k, i) += w[j] * v;
      M(j, k) += w[i] * v;
      M(k, j) += w[i] * v;
    }
  }
  return M;
}

/// out_k = sum_ij Gamma_ijk q_ij for symmetric q.
inline Vector contract_density(const Matrix& q, const GammaTensor& g) {
  const auto n = static_cast<Eigen::Index>(g.dim());
  if (q.rows() != n || q.cols() != n)
    throw std::invalid_argument("contract_density: dimension mismatch");
  Vector out = Vector::Zero(n);
  for (const auto& e : g.entries()) {
    const Eigen::Index i = e.i, j = e.j, k = e.k;
    const double v = e.value;
    if (i == j && j == k) {
      out[i] += v * q(i, i);
    } else if (i == j) {
      out[k] += v * q(i, i);
      out[i] += 2.0 * v * q(i, k);
    } else if (j == k) {
      out[i] += v * q(j, j);
      out[j] += 2.0 * v * q(i, j);
    } else {
      out[k] += 2.0 * v * q(i, j);
      out[j] += 2.0 * v * q(i, k);
      out[i] += 2.0 * v * q(j, k);
    }
  }
  return out;
}

inline TensorSet assemble_tensors(const BasisSet& basis, const RealGauntTable& table) {
  TensorSet t;
  t.S = assemble_overlap(basis);
  t.L = assemble_laplace(basis, t.S);
  t.gamma = assemble_gamma(basis, table);
  t.f0 = basis_at_origin(basis);
  return t;
}

inline TensorSet assemble_tensors(const BasisSet& basis) {
  return assemble_tensors(basis, RealGauntTable(basis.max_l()));
}

// ---------------------------------------------------------------------------
// Gamma cache file: 8-byte tag, u64 basis hash, u64 dim, u64 count, then
// count records of (u32 i, u32 j, u32 k, f64 value). All little-endian.

inline constexpr char kGammaCacheTag[8] = {'R', 'S', 'G', 'A', 'M', 'M', '0', '1'};

/// FNV-1a over the channel layout and exponent bit patterns.
inline std::uint64_t basis_hash(const BasisSet& basis) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  for (const auto& ch : basis.channels()) {
    mix(static_cast<std::uint64_t>(ch.l));
    mix(ch.exponents.size());
    for (double e : ch.exponents) mix(std::bit_cast<std::uint64_t>(e));
  }
  return h;
}

namespace detail {
inline void put_le(std::ostream& os, std::uint64_t v, int bytes) {
  char buf[8];
  for (int b = 0; b < bytes; ++b) buf[b] = static_cast<char>((v >> (8 * b)) & 0xffu);
  os.write(buf, bytes);
}
inline std::uint64_t get_le(std::istream& is, int bytes) {
  unsigned char buf[8] = {};
  is.read(reinterpret_cast<char*>(buf), bytes);
  if (!is) throw std::runtime_error("gamma cache: truncated file");
  std::uint64_t v = 0;
  for (int b = 0; b < bytes; ++b) v |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
  return v;
}
}  // namespace detail

inline void save_gamma_cache(const std::string& path, const BasisSet& basis, const GammaTensor& g) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("gamma cache: cannot open " + path);
  os.write(kGammaCacheTag, 8);
  detail::put_le(os, basis_hash(basis), 8);
  detail::put_le(os, g.dim(), 8);
  detail::put_le(os, g.nnz(), 8);
  for (const auto& e : g.entries()) {
    detail::put_le(os, e.i, 4);
    detail::put_le(os, e.j, 4);
    detail::put_le(os, e.k, 4);
    detail::put_le(os, std::bit_cast<std::uint64_t>(e.value), 8);
  }
  if (!os) throw std::runtime_error("gamma cache: write failed for " + path);
}

/// Returns false when the file is missing or was written for another basis.
inline bool load_gamma_cache(const std::string& path, const BasisSet& basis, GammaTensor& out) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return false;
  char tag[8];
  is.read(tag, 8);
  if (!is || std::memcmp(tag, kGammaCacheTag, 8) != 0) return false;
  if (detail::get_le(is, 8) != basis_hash(basis)) return false;
  const auto dim = detail::get_le(is, 8);
  if (dim != basis.size()) return false;
  const auto count = detail::get_le(is, 8);
  std::vector<GammaEntry> entries(count);
  for (auto& e : entries) {
    e.i = static_cast<std::uint32_t>(detail::get_le(is, 4));
    e.j = static_cast<std::uint32_t>(detail::get_le(is, 4));
    e.k = static_cast<std::uint32_t>(detail::get_le(is, 4));
    e.value = std::bit_cast<double>(detail::get_le(is, 8));
    if (e.i > e.j || e.j > e.k || e.k >= dim) throw std::runtime_error("gamma cache: bad record");
  }
  out = GammaTensor(dim, std::move(entries));
  return true;
}

}  // namespace ringscft
