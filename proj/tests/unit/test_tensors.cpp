#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace ringscft;
using namespace ringscft::testing;

TEST(Overlap, Examples) {
  const BasisSet b = build_basis({{0, 2, 1.0, 2.0, {}}, {1, 1, 1.0, 1.0, {}}});
  const Matrix S = assemble_overlap(b);
  for (Eigen::Index i = 0; i < S.rows(); ++i) EXPECT_EQ(S(i, i), 1.0);
  EXPECT_NEAR(S(0, 1), std::pow(2.0 * std::sqrt(2.0) / 3.0, 1.5), 1e-14);
  EXPECT_NEAR(S(0, 1), 0.915452, 1e-6);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 2; j < 5; ++j) EXPECT_EQ(S(i, j), 0.0);
}

TEST(Overlap, PositiveDefiniteAndBlockDiagonal) {
  const BasisSet b = oracle_basis();
  const Matrix S = assemble_overlap(b);
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      const auto &x = b.index(i), &y = b.index(j);
      if (x.l != y.l || x.m != y.m) EXPECT_EQ(S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), 0.0);
    }
}

TEST(Overlap, SurvivesExtremeExponentRatio) {
  const BasisSet b = build_basis({{0, 2, 1e-15, 1e11, {}}});
  const Matrix S = assemble_overlap(b);
  EXPECT_TRUE(S.allFinite());
  EXPECT_NEAR(S(0, 1), std::pow(2.0 * std::sqrt(1e-15 * 1e11) / (1e-15 + 1e11), 1.5), 1e-25);
}

TEST(Laplace, Examples) {
  for (double c : {0.01, 1.0, 42.0}) {
    const BasisSet b = build_basis({{0, 1, c, c, {}}});
    EXPECT_NEAR(assemble_laplace(b)(0, 0), -3.0 * c, 1e-12 * c);
  }
  const BasisSet b = build_basis({{0, 2, 1.0, 2.0, {}}, {1, 2, 1.0, 2.0, {}}});
  const Matrix L = assemble_laplace(b);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 2; j < 8; ++j) EXPECT_EQ(L(i, j), 0.0);
}

TEST(Laplace, VerbatimFormulaIsSymmetricBeforeAveraging) {
  const BasisSet& b = desk_basis();
  const Matrix S = assemble_overlap(b);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> pick(0, b.size() - 1);
  int tested = 0;
  while (tested < 200) {
    const std::size_t i = pick(rng), j = pick(rng);
    const auto &x = b.index(i), &y = b.index(j);
    if (x.l != y.l || x.m != y.m) continue;
    auto raw = [&](std::size_t a, std::size_t c) {
      const double ca = b.exponent(a), cc = b.exponent(c);
      const int la = b.index(a).l, lc = b.index(c).l;
      return 2.0 * ca / (ca + cc) * (ca * (la - lc) - cc * (2 * la + 3)) *
             S(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(a));
    };
    const double lij = raw(i, j), lji = raw(j, i);
    EXPECT_LE(std::abs(lij - lji), 1e-12 * std::max(std::abs(lij), std::abs(lji)) + 1e-300);
    ++tested;
  }
}

TEST(Laplace, NegativeDefinite) {
  const Matrix L = assemble_laplace(oracle_basis());
  Eigen::SelfAdjointEigenSolver<Matrix> es(L);
  EXPECT_LT(es.eigenvalues().maxCoeff(), 0.0);
}

TEST(TensorOracle, OverlapLaplaceGammaMatchQuadrature) {
  const BasisSet b = oracle_basis();
  ASSERT_EQ(b.size(), 12u);
  const TensorSet t = assemble_tensors(b);
  const TensorOracle o{b};
  double worst_s = 0.0, worst_l = 0.0, worst_g = 0.0;
  const std::size_t n = b.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      const double s = o.S(i, j), l = o.L(i, j);
      EXPECT_TRUE(close_rel(t.S(ii, jj), s, 1e-8)) << i << "," << j << " " << t.S(ii, jj) << " vs " << s;
      EXPECT_TRUE(close_rel(t.L(ii, jj), l, 1e-8)) << i << "," << j << " " << t.L(ii, jj) << " vs " << l;
      worst_s = std::max(worst_s, std::abs(t.S(ii, jj) - s) / std::max(std::abs(s), 1e-300));
      if (l != 0.0) worst_l = std::max(worst_l, std::abs(t.L(ii, jj) - l) / std::abs(l));
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      for (std::size_t k = j; k < n; ++k) {
        const double g = o.G(i, j, k);
        EXPECT_TRUE(close_rel(t.gamma(i, j, k), g, 1e-8)) << i << "," << j << "," << k << " " << t.gamma(i, j, k) << " vs " << g;
        if (g != 0.0) worst_g = std::max(worst_g, std::abs(t.gamma(i, j, k) - g) / std::abs(g));
      }
  RecordProperty("worst_rel_S", std::to_string(worst_s));
  RecordProperty("worst_rel_L", std::to_string(worst_l));
  RecordProperty("worst_rel_Gamma", std::to_string(worst_g));
}

TEST(Gamma, Examples) {
  const BasisSet b = build_basis({{0, 1, 1.0, 1.0, {}}});
  const GammaTensor g = assemble_gamma(b, build_real_gaunt_table(0));
  const double N = b.norm(0);
  EXPECT_NEAR(g(0, 0, 0), N * N * N * std::tgamma(1.5) / (2.0 * std::pow(3.0, 1.5)) / std::sqrt(4.0 * M_PI), 1e-14);
  const double full = half_line_integral([&](double r) { return std::pow(oracle_radial(0, 1.0, r), 3) * r * r; }) / std::sqrt(4.0 * M_PI);
  EXPECT_NEAR(g(0, 0, 0), full, 1e-12);

  const BasisSet p = build_basis({{0, 1, 1.0, 1.0, {}}, {1, 1, 1.0, 1.0, {}}});
  const GammaTensor gp = assemble_gamma(p, build_real_gaunt_table(1));
  // (s, p_{-1}, p_{+1}) has an odd number of negative m.
  EXPECT_EQ(gp(0, 1, 3), 0.0);
  EXPECT_NE(gp(0, 1, 1), 0.0);
  EXPECT_THROW(assemble_gamma(p, build_real_gaunt_table(0)), std::invalid_argument);
}

TEST(Gamma, TotalSymmetry) {
  const TensorSet& t = desk_tensors();
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> pick(0, t.gamma.nnz() - 1);
  for (int k = 0; k < 500; ++k) {
    const GammaEntry& e = t.gamma.entries()[pick(rng)];
    const double v = e.value;
    EXPECT_EQ(t.gamma(e.k, e.j, e.i), v);
    EXPECT_EQ(t.gamma(e.j, e.i, e.k), v);
    EXPECT_EQ(t.gamma(e.i, e.k, e.j), v);
  }
}

TEST(Gamma, StoredCountMatchesSelectionRules) {
  const BasisSet& b = desk_basis();
  const TensorSet& t = desk_tensors();
  const auto& blocks = b.blocks();
  std::size_t predicted = 0;
  for (std::size_t b1 = 0; b1 < blocks.size(); ++b1)
    for (std::size_t b2 = b1; b2 < blocks.size(); ++b2)
      for (std::size_t b3 = b2; b3 < blocks.size(); ++b3) {
        const auto &A = blocks[b1], &B = blocks[b2], &C = blocks[b3];
        if (!real_gaunt_allowed(A.l, A.m, B.l, B.m, C.l, C.m)) continue;
        const std::size_t a = A.count, bb = B.count, c = C.count;
        if (b1 == b2 && b2 == b3) predicted += a * (a + 1) * (a + 2) / 6;
        else if (b1 == b2) predicted += a * (a + 1) / 2 * c;
        else if (b2 == b3) predicted += a * bb * (bb + 1) / 2;
        else predicted += a * bb * c;
      }
  EXPECT_EQ(t.gamma.nnz(), predicted);
}

TEST(ContractField, Examples) {
  const BasisSet one = build_basis({{0, 1, 1.0, 1.0, {}}});
  const TensorSet t1 = assemble_tensors(one);
  Vector w(1);
  w << 2.5;
  EXPECT_NEAR(contract_field(w, t1.gamma)(0, 0), 2.5 * t1.gamma(0, 0, 0), 1e-15);

  const TensorSet t = assemble_tensors(oracle_basis());
  EXPECT_EQ(contract_field(Vector::Zero(12), t.gamma).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(contract_field(Vector::Zero(11), t.gamma), std::invalid_argument);
  EXPECT_THROW(contract_density(Matrix::Zero(11, 11), t.gamma), std::invalid_argument);
}

TEST(ContractField, MatchesDenseTripleLoop) {
  const BasisSet b = oracle_basis();
  const TensorSet t = assemble_tensors(b);
  const auto n = static_cast<Eigen::Index>(b.size());
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i) w[i] = g(rng);
  Matrix q(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) q(i, j) = g(rng);
  q = 0.5 * (q + q.transpose()).eval();

  Matrix M = Matrix::Zero(n, n);
  Vector v = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k) {
        const double G = t.gamma(static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<std::size_t>(k));
        M(i, j) += w[k] * G;
        v[k] += G * q(i, j);
      }
  const Matrix C = contract_field(w, t.gamma);
  EXPECT_LT((C - M).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((C - C.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((contract_density(q, t.gamma) - v).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(GammaCache, RoundTripAndMismatch) {
  const BasisSet b = oracle_basis();
  const TensorSet t = assemble_tensors(b);
  const auto dir = std::filesystem::temp_directory_path() / "ringscft_cache_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "gamma.bin").string();
  save_gamma_cache(path, b, t.gamma);
  GammaTensor back;
  ASSERT_TRUE(load_gamma_cache(path, b, back));
  ASSERT_EQ(back.nnz(), t.gamma.nnz());
  for (std::size_t e = 0; e < back.nnz(); ++e) {
    EXPECT_EQ(back.entries()[e].i, t.gamma.entries()[e].i);
    EXPECT_EQ(back.entries()[e].value, t.gamma.entries()[e].value);
  }
  const BasisSet other({{0, 4, 0.3, 9.0, {}}, {1, 1, 0.7, 0.7, {}}, {2, 1, 1.3, 1.3, {}}});
  EXPECT_NE(basis_hash(b), basis_hash(other));
  GammaTensor none;
  EXPECT_FALSE(load_gamma_cache(path, other, none));
  EXPECT_FALSE(load_gamma_cache((dir / "missing.bin").string(), b, none));
  std::filesystem::remove_all(dir);
}
