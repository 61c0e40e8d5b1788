#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ringscft/harmonics.hpp"
#include "ringscft/numeric.hpp"

namespace ringscft {

namespace detail {

inline double log_factorial(int n) { return std::lgamma(n + 1.0); }

inline bool triangle(int l1, int l2, int l3) {
  return l3 >= std::abs(l1 - l2) && l3 <= l1 + l2;
}

// 3-j symbol at the top of the l3 ladder, l3 = l1 + l2.
inline double wigner3j_top(int l1, int l2, int m1, int m2, int m3) {
  const int L = l1 + l2;
  const double lg = log_factorial(2 * l1) + log_factorial(2 * l2) + log_factorial(L + m3) +
                    log_factorial(L - m3) - log_factorial(2 * L + 1) - log_factorial(l1 + m1) -
                    log_factorial(l1 - m1) - log_factorial(l2 + m2) - log_factorial(l2 - m2);
  const int phase = l1 - l2 - m3;
  return ((phase % 2 == 0) ? 1.0 : -1.0) * std::exp(0.5 * lg);
}

}  // namespace detail

/// Wigner 3-j symbol with all m = 0, by the two-step downward ladder from
/// l3 = l1 + l2:  (l1 l2 l3-2; 0 0 0) = -K(l3)/K(l3-1) (l1 l2 l3; 0 0 0),
/// K(l3) = sqrt(l3^2 - (l1-l2)^2) sqrt((l1+l2+1)^2 - l3^2).
inline double wigner3j_zero_m(int l1, int l2, int l3) {
  if (l1 < 0 || l2 < 0 || l3 < 0) throw std::invalid_argument("wigner3j: negative l");
  if (!detail::triangle(l1, l2, l3)) return 0.0;
  if ((l1 + l2 + l3) % 2 != 0) return 0.0;
  auto K = [&](int L) {
    const double d = l1 - l2, s = l1 + l2 + 1.0;
    return std::sqrt(static_cast<double>(L) * L - d * d) * std::sqrt(s * s - static_cast<double>(L) * L);
  };
  double f = detail::wigner3j_top(l1, l2, 0, 0, 0);
  for (int L = l1 + l2; L > l3; L -= 2) f = -K(L) / K(L - 1) * f;
  return f;
}

/// Wigner 3-j symbol (l1 l2 l3; m1 m2 m3), Schulten-Gordon-Cruzan recursion
/// downward in l3 from l3 = l1 + l2:
///   l3 A(l3+1) f(l3+1) + B(l3) f(l3) + (l3+1) A(l3) f(l3-1) = 0.
/// Returns exactly 0 whenever a selection rule fails.
inline double wigner3j(int l1, int l2, int l3, int m1, int m2, int m3) {
  if (l1 < 0 || l2 < 0 || l3 < 0) throw std::invalid_argument("wigner3j: negative l");
  if (std::abs(m1) > l1 || std::abs(m2) > l2 || std::abs(m3) > l3) return 0.0;
  if (m1 + m2 + m3 != 0) return 0.0;
  if (!detail::triangle(l1, l2, l3)) return 0.0;
  if (m1 == 0 && m2 == 0 && m3 == 0) return wigner3j_zero_m(l1, l2, l3);

  const double d = l1 - l2, s = l1 + l2 + 1.0;
  const double c1 = l1 * (l1 + 1.0), c2 = l2 * (l2 + 1.0);
  auto A = [&](int L) {
    const double LL = static_cast<double>(L) * L;
    const double t1 = LL - d * d, t2 = s * s - LL, t3 = LL - static_cast<double>(m3) * m3;
    if (t1 <= 0.0 || t2 <= 0.0 || t3 <= 0.0) return 0.0;
    return std::sqrt(t1) * std::sqrt(t2) * std::sqrt(t3);
  };
  auto B = [&](int L) {
    return -(2.0 * L + 1.0) * (c1 * m3 - c2 * m3 - L * (L + 1.0) * (m2 - m1));
  };

  const int top = l1 + l2;
  double f_up = 0.0;  // f(L+1)
  double f = detail::wigner3j_top(l1, l2, m1, m2, m3);
  for (int L = top; L > l3; --L) {
    const double next = -(L * A(L + 1) * f_up + B(L) * f) / ((L + 1.0) * A(L));
    f_up = f;
    f = next;
  }
  return f;
}

/// Integral of three complex spherical harmonics Y_l1^m1 Y_l2^m2 Y_l3^m3
/// over the sphere (no conjugation).
inline double gaunt(int l1, int l2, int l3, int m1, int m2, int m3) {
  if (m1 + m2 + m3 != 0) return 0.0;
  const double w0 = wigner3j_zero_m(l1, l2, l3);
  if (w0 == 0.0) return 0.0;
  const double wm = wigner3j(l1, l2, l3, m1, m2, m3);
  if (wm == 0.0) return 0.0;
  return std::sqrt((2.0 * l1 + 1.0) * (2.0 * l2 + 1.0) * (2.0 * l3 + 1.0) / kFourPi) * w0 * wm;
}

/// Element U^m_{m'} of the unitary map Z_l^m = sum_{m'} U^m_{m'} Y_l^{m'}.
inline std::complex<double> real_unitary_elem(int m, int mp) {
  using namespace std::complex_literals;
  if (std::abs(m) != std::abs(mp)) return 0.0;
  if (m == 0) return mp == 0 ? 1.0 : 0.0;
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  auto parity = [](int k) { return (std::abs(k) % 2 == 0) ? 1.0 : -1.0; };
  std::complex<double> u = 0.0;
  if (m > 0) {
    if (mp == m) u += 1.0;
    if (mp == -m) u += parity(mp);
  } else {
    if (mp == m) u += 1.0i * parity(mp - m);
    if (mp == -m) u -= 1.0i * parity(-m);
  }
  return kInvSqrt2 * u;
}

/// Selection rules for the integral of three real harmonics: triangle,
/// even l-sum, one |m| equal to the sum of the other two, and an even
/// number of negative m (sine factors).
inline bool real_gaunt_allowed(int l1, int m1, int l2, int m2, int l3, int m3) {
  if (l1 < 0 || l2 < 0 || l3 < 0) return false;
  if (std::abs(m1) > l1 || std::abs(m2) > l2 || std::abs(m3) > l3) return false;
  if (!detail::triangle(l1, l2, l3) || (l1 + l2 + l3) % 2 != 0) return false;
  const int a = std::abs(m1), b = std::abs(m2), c = std::abs(m3);
  if (a != b + c && b != a + c && c != a + b) return false;
  const int negatives = (m1 < 0) + (m2 < 0) + (m3 < 0);
  return negatives % 2 == 0;
}

/// Integral of three real spherical harmonics Z_l^m Z_lp^mp Z_lpp^mpp,
///   alpha = sum_{m1 m2 m3} Re(U^m_{m1} U^mp_{m2} U^mpp_{m3}) G^{m1 m2 m3}.
inline double real_gaunt(int l, int m, int lp, int mp, int lpp, int mpp) {
  if (!real_gaunt_allowed(l, m, lp, mp, lpp, mpp)) return 0.0;
  double sum = 0.0;
  const std::array<int, 2> s1{std::abs(m), -std::abs(m)};
  const std::array<int, 2> s2{std::abs(mp), -std::abs(mp)};
  const std::array<int, 2> s3{std::abs(mpp), -std::abs(mpp)};
  for (std::size_t a = 0; a < (m == 0 ? 1u : 2u); ++a)
    for (std::size_t b = 0; b < (mp == 0 ? 1u : 2u); ++b)
      for (std::size_t c = 0; c < (mpp == 0 ? 1u : 2u); ++c) {
        const int m1 = s1[a], m2 = s2[b], m3 = s3[c];
        if (m1 + m2 + m3 != 0) continue;
        const auto u = real_unitary_elem(m, m1) * real_unitary_elem(mp, m2) *
                       real_unitary_elem(mpp, m3);
        if (u.real() == 0.0) continue;
        sum += u.real() * gaunt(l, lp, lpp, m1, m2, m3);
      }
  return sum;
}

/// Sparse cache of nonzero real Gaunt coefficients for l, l', l'' <= l_max,
/// keyed by the canonically sorted (l, m) pairs.
class RealGauntTable {
 public:
  RealGauntTable() = default;

  explicit RealGauntTable(int l_max) : l_max_(l_max) {
    if (l_max < 0) throw std::invalid_argument("RealGauntTable: l_max < 0");
    const int n = lm_count(l_max);
    std::vector<std::pair<int, int>> lm(static_cast<std::size_t>(n));
    for (int l = 0; l <= l_max; ++l)
      for (int m = -l; m <= l; ++m) lm[static_cast<std::size_t>(lm_index(l, m))] = {l, m};
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b)
        for (int c = b; c < n; ++c) {
          const auto [l1, m1] = lm[static_cast<std::size_t>(a)];
          const auto [l2, m2] = lm[static_cast<std::size_t>(b)];
          const auto [l3, m3] = lm[static_cast<std::size_t>(c)];
          if (!real_gaunt_allowed(l1, m1, l2, m2, l3, m3)) continue;
          const double v = real_gaunt(l1, m1, l2, m2, l3, m3);
          // Allowed keys can still vanish by accident, e.g. (2 3 3; 0 2 2); drop roundoff.
          if (std::abs(v) > 1e-14) table_.emplace(pack(a, b, c), v);
        }
  }

  int max_l() const { return l_max_; }
  std::size_t size() const { return table_.size(); }

  /// Cached value; 0 for forbidden keys. Throws if any l exceeds l_max.
  double operator()(int l1, int m1, int l2, int m2, int l3, int m3) const {
    if (l1 > l_max_ || l2 > l_max_ || l3 > l_max_)
      throw std::out_of_range("RealGauntTable: l beyond tabulated l_max");
    if (std::abs(m1) > l1 || std::abs(m2) > l2 || std::abs(m3) > l3) return 0.0;
    std::array<int, 3> k{lm_index(l1, m1), lm_index(l2, m2), lm_index(l3, m3)};
    std::sort(k.begin(), k.end());
    const auto it = table_.find(pack(k[0], k[1], k[2]));
    return it == table_.end() ? 0.0 : it->second;
  }

  /// Visit every stored entry as (lm_a, lm_b, lm_c, value), lm_a <= lm_b <= lm_c.
  template <class F>
  void for_each(F&& f) const {
    for (const auto& [key, v] : table_)
      f(static_cast<int>(key & 0xffff), static_cast<int>((key >> 16) & 0xffff),
        static_cast<int>((key >> 32) & 0xffff), v);
  }

 private:
  static std::uint64_t pack(int a, int b, int c) {
    return static_cast<std::uint64_t>(a) | (static_cast<std::uint64_t>(b) << 16) |
           (static_cast<std::uint64_t>(c) << 32);
  }

  int l_max_ = -1;
  std::unordered_map<std::uint64_t, double> table_;
};

inline RealGauntTable build_real_gaunt_table(int l_max) { return RealGauntTable(l_max); }

}  // namespace ringscft
