#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ringscft/harmonics.hpp"
#include "ringscft/numeric.hpp"

namespace ringscft {

/// One angular Gaussian f_plm = N_pl Z_l^m(theta, phi) r^l exp(-c_pl r^2).
/// p is 1-based within its l channel.
struct BasisIndex {
  int p = 1;
  int l = 0;
  int m = 0;
  auto operator<=>(const BasisIndex&) const = default;
};

/// Radial exponents for one angular momentum channel. When `exponents` is
/// empty the channel is even-tempered: `count` exponents in geometric
/// progression from c_min to c_max. A non-empty list overrides the rule.
struct ChannelSpec {
  int l = 0;
  int count = 1;
  double c_min = 1.0;
  double c_max = 1.0;
  std::vector<double> exponents;
};

/// Contiguous run of basis functions sharing (l, m); S and L are block
/// diagonal over these.
struct BasisBlock {
  int l = 0;
  int m = 0;
  std::size_t offset = 0;
  std::size_t count = 0;
  std::size_t channel = 0;
};

/// log N_pl with N_pl = sqrt(2 (2c)^{l+3/2} / Gamma(l+3/2)).
inline double log_normalization(int l, double c) {
  const double a = l + 1.5;
  return 0.5 * (std::log(2.0) + a * std::log(2.0 * c) - std::lgamma(a));
}

/// Even-tempered exponents c_p = c_min (c_max/c_min)^{(p-1)/(P-1)}.
inline std::vector<double> even_tempered_exponents(int count, double c_min, double c_max) {
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = c_min;
    return out;
  }
  const double lo = std::log(c_min), hi = std::log(c_max);
  for (int p = 0; p < count; ++p) {
    const double t = static_cast<double>(p) / (count - 1);
    out[static_cast<std::size_t>(p)] = std::exp(lo + t * (hi - lo));
  }
  out.front() = c_min;
  out.back() = c_max;
  return out;
}

/// Immutable set of normalized angular Gaussians centred at the origin.
/// Functions are ordered by channel, then m = -l..l, then p, so every
/// (l, m) block is contiguous.
class BasisSet {
 public:
  BasisSet() = default;

  explicit BasisSet(std::vector<ChannelSpec> channels) : channels_(std::move(channels)) {
    if (channels_.empty()) throw std::invalid_argument("basis: no channels");
    std::vector<int> seen;
    for (auto& ch : channels_) {
      if (ch.l < 0) throw std::invalid_argument("basis: negative l");
      if (std::find(seen.begin(), seen.end(), ch.l) != seen.end())
        throw std::invalid_argument("basis: duplicate channel l=" + std::to_string(ch.l));
      seen.push_back(ch.l);
      if (ch.exponents.empty()) {
        if (ch.count < 1) throw std::invalid_argument("basis: channel count < 1");
        if (!(ch.c_min > 0.0) || !(ch.c_max > 0.0))
          throw std::invalid_argument("basis: exponents must be positive");
        if (ch.c_min > ch.c_max) throw std::invalid_argument("basis: c_min > c_max");
        if (ch.count > 1 && ch.c_min == ch.c_max)
          throw std::invalid_argument("basis: c_min == c_max with count > 1");
        ch.exponents = even_tempered_exponents(ch.count, ch.c_min, ch.c_max);
      } else {
        ch.count = static_cast<int>(ch.exponents.size());
        for (std::size_t p = 0; p < ch.exponents.size(); ++p) {
          if (!(ch.exponents[p] > 0.0))
            throw std::invalid_argument("basis: exponents must be positive");
          if (p > 0 && !(ch.exponents[p] > ch.exponents[p - 1]))
            throw std::invalid_argument("basis: exponents must strictly increase");
        }
        ch.c_min = ch.exponents.front();
        ch.c_max = ch.exponents.back();
      }
      max_l_ = std::max(max_l_, ch.l);
    }

    for (std::size_t c = 0; c < channels_.size(); ++c) {
      const auto& ch = channels_[c];
      channel_radial_offset_.push_back(radial_l_.size());
      for (double e : ch.exponents) {
        radial_l_.push_back(ch.l);
        radial_exponent_.push_back(e);
        radial_log_norm_.push_back(log_normalization(ch.l, e));
      }
      for (int m = -ch.l; m <= ch.l; ++m) {
        blocks_.push_back({ch.l, m, indices_.size(), ch.exponents.size(), c});
        for (int p = 1; p <= ch.count; ++p) {
          indices_.push_back({p, ch.l, m});
          radial_of_.push_back(channel_radial_offset_[c] + static_cast<std::size_t>(p - 1));
        }
      }
    }
  }

  std::size_t size() const { return indices_.size(); }
  const std::vector<BasisIndex>& indices() const { return indices_; }
  const BasisIndex& index(std::size_t i) const { return indices_[i]; }
  const std::vector<ChannelSpec>& channels() const { return channels_; }
  const std::vector<BasisBlock>& blocks() const { return blocks_; }
  int max_l() const { return max_l_; }

  double exponent(std::size_t i) const { return radial_exponent_[radial_of_[i]]; }
  double log_norm(std::size_t i) const { return radial_log_norm_[radial_of_[i]]; }
  double norm(std::size_t i) const { return std::exp(log_norm(i)); }

  /// Radial functions R_pl = N_pl r^l exp(-c r^2), one per (p, l).
  std::size_t radial_size() const { return radial_l_.size(); }
  std::size_t radial_of(std::size_t i) const { return radial_of_[i]; }
  int radial_l(std::size_t k) const { return radial_l_[k]; }
  double radial_exponent(std::size_t k) const { return radial_exponent_[k]; }
  double radial_log_norm(std::size_t k) const { return radial_log_norm_[k]; }

  /// Exponent c_pl of channel l (p 1-based).
  double exponent(int p, int l) const { return channel_for(l).exponents.at(static_cast<std::size_t>(p - 1)); }
  double normalization(int p, int l) const { return std::exp(log_normalization(l, exponent(p, l))); }

  const ChannelSpec& channel_for(int l) const {
    for (const auto& ch : channels_)
      if (ch.l == l) return ch;
    throw std::out_of_range("basis: no channel with l=" + std::to_string(l));
  }

  /// Block of (l, m), or nullptr when the basis has no such channel.
  const BasisBlock* find_block(int l, int m) const {
    for (const auto& b : blocks_)
      if (b.l == l && b.m == m) return &b;
    return nullptr;
  }

 private:
  std::vector<ChannelSpec> channels_;
  std::vector<BasisIndex> indices_;
  std::vector<BasisBlock> blocks_;
  std::vector<std::size_t> radial_of_;
  std::vector<std::size_t> channel_radial_offset_;
  std::vector<int> radial_l_;
  std::vector<double> radial_exponent_;
  std::vector<double> radial_log_norm_;
  int max_l_ = 0;
};

inline BasisSet build_basis(std::vector<ChannelSpec> channels) {
  return BasisSet(std::move(channels));
}

/// Same channels restricted to l = 0.
inline BasisSet spherical_subset(const BasisSet& basis) {
  std::vector<ChannelSpec> keep;
  for (const auto& ch : basis.channels())
    if (ch.l == 0) keep.push_back(ch);
  if (keep.empty()) throw std::invalid_argument("basis: no l=0 channel");
  return BasisSet(std::move(keep));
}

/// R(r) = N r^l exp(-c r^2), flushed to zero below DBL_MIN.
inline double radial_value(int l, double log_norm, double c, double r) {
  if (r == 0.0) return l == 0 ? std::exp(log_norm) : 0.0;
  return exp_flush(log_norm + l * std::log(r) - c * r * r);
}

/// dR/dr = R (l/r - 2 c r).
inline double radial_derivative(int l, double log_norm, double c, double r) {
  if (r == 0.0) return (l == 1) ? std::exp(log_norm) : 0.0;
  return radial_value(l, log_norm, c, r) * (l / r - 2.0 * c * r);
}

/// Values of every basis function at (r, theta, phi).
inline Vector eval_basis(const BasisSet& basis, double r, double theta, double phi) {
  if (r < 0.0) throw std::invalid_argument("eval_basis: r < 0");
  const RealHarmonics z(basis.max_l(), theta, phi);
  Vector out(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto& idx = basis.index(i);
    out[static_cast<Eigen::Index>(i)] =
        radial_value(idx.l, basis.log_norm(i), basis.exponent(i), r) * z(idx.l, idx.m);
  }
  return out;
}

/// f(0): N_p0 / sqrt(4 pi) on l = 0 entries, zero elsewhere.
inline Vector basis_at_origin(const BasisSet& basis) {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(basis.size()));
  const double y00 = 1.0 / std::sqrt(kFourPi);
  for (std::size_t i = 0; i < basis.size(); ++i)
    if (basis.index(i).l == 0) out[static_cast<Eigen::Index>(i)] = basis.norm(i) * y00;
  return out;
}

}  // namespace ringscft
