#include "oracles.hpp"
#include "pcp/io.hpp"
#include "pcp/norms.hpp"
#include "pcp/rng.hpp"
#include "pcp/svd.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace pcp;

namespace {

double orthonormality_error(const DenseMatrix& q) {
  return (q.transpose() * q - DenseMatrix::Identity(q.cols(), q.cols())).norm();
}

void expect_valid_factors(const SvdFactors& f) {
  EXPECT_LE(orthonormality_error(f.u), 1e-10);
  EXPECT_LE(orthonormality_error(f.v), 1e-10);
  for (Index i = 0; i < f.k(); ++i) {
    EXPECT_GE(f.sigma(i), 0.0);
    if (i > 0) EXPECT_LE(f.sigma(i), f.sigma(i - 1));
  }
}

/// Largest principal-angle sine between two column spaces of equal dimension.
double subspace_gap(const DenseMatrix& a, const DenseMatrix& b) {
  return norm_operator(a * a.transpose() - b * b.transpose());
}

}  // namespace

TEST(SvdFull, ZeroMatrix) {
  const SvdFactors f = svd_full(DenseMatrix::Zero(3, 3));
  ASSERT_EQ(f.k(), 3);
  EXPECT_EQ(f.sigma.norm(), 0.0);
  EXPECT_EQ(f.rank(), 0u);
  expect_valid_factors(f);
}

TEST(SvdFull, DiagonalIsItsOwnFactorization) {
  DenseMatrix d = DenseMatrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  const SvdFactors f = svd_full(d);
  EXPECT_NEAR(f.sigma(0), 3.0, 1e-15);
  EXPECT_NEAR(f.sigma(1), 1.0, 1e-15);
  EXPECT_LE((f.u - DenseMatrix::Identity(2, 2)).norm(), 1e-14);
  EXPECT_LE((f.v - DenseMatrix::Identity(2, 2)).norm(), 1e-14);
}

TEST(SvdFull, Random8x5MatchesEigenOracle) {
  const DenseMatrix m = gen_gaussian({42, 0}, 8, 5, 1.0);
  const SvdFactors f = svd_full(m);
  expect_valid_factors(f);
  EXPECT_LE((f.reconstruct() - m).norm(), 1e-9 * m.norm());
  const auto expected = oracle::singular_values_via_gram(m);
  ASSERT_EQ(f.k(), 5);
  for (Index i = 0; i < 5; ++i) EXPECT_NEAR(f.sigma(i), expected[static_cast<std::size_t>(i)], 1e-8);
}

TEST(SvdFull, SignConventionMakesLargestEntryNonnegative) {
  const DenseMatrix m = gen_gaussian({5, 1}, 9, 6, 1.0);
  const SvdFactors f = svd_full(m);
  for (Index c = 0; c < f.u.cols(); ++c) {
    Index arg = 0;
    f.u.col(c).cwiseAbs().maxCoeff(&arg);
    EXPECT_GE(f.u(arg, c), 0.0);
  }
  const SvdFactors g = svd_full(-m);
  EXPECT_LE((g.sigma - f.sigma).norm(), 1e-12);
  EXPECT_LE((g.u - f.u).norm(), 1e-10);
  EXPECT_LE((g.v + f.v).norm(), 1e-10);
}

TEST(SvdFull, ReconstructionPropertyUpTo200) {
  const Index shapes[][2] = {{1, 1}, {1, 7}, {7, 1}, {20, 13}, {13, 20}, {64, 64}, {200, 150}, {200, 200}};
  std::uint64_t s = 0;
  for (const auto& sh : shapes) {
    const DenseMatrix m = gen_gaussian({100 + s++, 0}, sh[0], sh[1], 1.0);
    const SvdFactors f = svd_full(m);
    expect_valid_factors(f);
    EXPECT_LE((f.reconstruct() - m).norm(), 1e-9 * m.norm()) << sh[0] << "x" << sh[1];
  }
}

TEST(SvdFull, RejectsNonFinite) {
  DenseMatrix m = DenseMatrix::Ones(3, 3);
  m(1, 1) = std::nan("");
  EXPECT_THROW(svd_full(m), InvalidArgument);
}

TEST(SvdTruncated, Diagonal) {
  DenseMatrix d = DenseMatrix::Zero(3, 3);
  d(0, 0) = 5.0;
  d(1, 1) = 3.0;
  d(2, 2) = 1.0;
  const SvdFactors f = svd_truncated(d, 2);
  ASSERT_EQ(f.k(), 2);
  EXPECT_NEAR(f.sigma(0), 5.0, 1e-12);
  EXPECT_NEAR(f.sigma(1), 3.0, 1e-12);
}

TEST(SvdTruncated, FullRankTruncationEqualsFullSvd) {
  for (std::uint64_t s = 0; s < 6; ++s) {
    const Index rows = 10 + static_cast<Index>(s) * 3;
    const Index cols = 25 - static_cast<Index>(s) * 3;
    const DenseMatrix m = gen_gaussian({7, s}, rows, cols, 1.0);
    const Index p = std::min(rows, cols);
    const SvdFactors t = svd_truncated(m, p);
    const SvdFactors f = svd_full(m);
    expect_valid_factors(t);
    EXPECT_LE((t.sigma - f.sigma).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(SvdTruncated, LowRankProductReconstructs) {
  const DenseMatrix x = gen_gaussian({4, 1}, 30, 4, 1.0);
  const DenseMatrix y = gen_gaussian({4, 2}, 30, 4, 1.0);
  const DenseMatrix m = x * y.transpose();
  const SvdFactors t = svd_truncated(m, 4);
  expect_valid_factors(t);
  EXPECT_LE((t.reconstruct() - m).norm(), 1e-8 * m.norm());
  const SvdFactors f = svd_full(m);
  EXPECT_LE(subspace_gap(t.u, f.u.leftCols(4)), 1e-8);
  EXPECT_LE(subspace_gap(t.v, f.v.leftCols(4)), 1e-8);
}

TEST(SvdTruncated, TopTripletsAgreeWithFullSvd) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const DenseMatrix m = gen_gaussian({77, s}, 60, 45, 1.0);
    const SvdFactors f = svd_full(m);
    for (const Index k : {1, 3, 7, 12}) {
      const SvdFactors t = svd_truncated(m, k);
      expect_valid_factors(t);
      EXPECT_LE((t.sigma - f.sigma.head(k)).cwiseAbs().maxCoeff(), 1e-10 * f.sigma(0));
      for (Index c = 0; c < k; ++c) {
        EXPECT_LE((t.u.col(c) - f.u.col(c)).norm(), 1e-6) << "k=" << k << " c=" << c;
      }
    }
  }
}

TEST(SvdTruncated, WideMatrix) {
  const DenseMatrix m = gen_gaussian({8, 8}, 12, 40, 1.0);
  const SvdFactors t = svd_truncated(m, 5);
  const SvdFactors f = svd_full(m);
  EXPECT_EQ(t.u.rows(), 12);
  EXPECT_EQ(t.v.rows(), 40);
  EXPECT_LE((t.sigma - f.sigma.head(5)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SvdTruncated, ZeroMatrixAndBadRank) {
  const SvdFactors t = svd_truncated(DenseMatrix::Zero(6, 4), 2);
  EXPECT_EQ(t.sigma.norm(), 0.0);
  expect_valid_factors(t);
  EXPECT_THROW(svd_truncated(DenseMatrix::Ones(3, 3), 0), InvalidArgument);
  EXPECT_THROW(svd_truncated(DenseMatrix::Ones(3, 3), 4), InvalidArgument);
}

TEST(SvdTruncated, RankDeficientBeyondRank) {
  const DenseMatrix m = gen_gaussian({9, 1}, 20, 2, 1.0) * gen_gaussian({9, 2}, 15, 2, 1.0).transpose();
  const SvdFactors t = svd_truncated(m, 5);
  expect_valid_factors(t);
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_LE((t.reconstruct() - m).norm(), 1e-10 * m.norm());
}

TEST(Norms, Identity) {
  const MatrixNorms n = norms(DenseMatrix::Identity(3, 3));
  EXPECT_NEAR(n.operator_norm, 1.0, 1e-14);
  EXPECT_NEAR(n.nuclear, 3.0, 1e-14);
  EXPECT_NEAR(n.frobenius, std::sqrt(3.0), 1e-14);
  EXPECT_EQ(n.l1, 3.0);
  EXPECT_EQ(n.linf, 1.0);
}

TEST(Norms, Zero) {
  const MatrixNorms n = norms(DenseMatrix::Zero(4, 2));
  EXPECT_EQ(n.operator_norm, 0.0);
  EXPECT_EQ(n.nuclear, 0.0);
  EXPECT_EQ(n.frobenius, 0.0);
  EXPECT_EQ(n.l1, 0.0);
  EXPECT_EQ(n.linf, 0.0);
}

TEST(Norms, TwoByTwoAgainstEigenOracle) {
  DenseMatrix m(2, 2);
  m << 1, 2, 3, 4;
  const auto sv = oracle::singular_values_via_gram(m);
  const MatrixNorms n = norms(m);
  EXPECT_NEAR(n.nuclear, sv[0] + sv[1], 1e-12);
  EXPECT_NEAR(n.operator_norm, sv[0], 1e-12);
  EXPECT_EQ(n.l1, 10.0);
  EXPECT_EQ(n.linf, 4.0);
}

TEST(Norms, InequalitiesOnRandomInputs) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const Index r = 1 + static_cast<Index>(s % 9);
    const Index c = 1 + static_cast<Index>((s * 7) % 11);
    const DenseMatrix m = gen_gaussian({31, s}, r, c, 1.0 + static_cast<double>(s));
    const MatrixNorms n = norms(m);
    const double slack = 1e-12 * n.frobenius;
    EXPECT_LE(n.operator_norm, n.frobenius + slack);
    EXPECT_LE(n.frobenius, n.nuclear + slack);
    EXPECT_LE(n.linf, n.frobenius + slack);
    EXPECT_LE(n.frobenius, std::sqrt(static_cast<double>(r * c)) * n.linf + slack);
  }
}

TEST(NumericalRank, Tolerance) {
  Vector s(3);
  s << 1.0, 1e-10, 1e-16;
  EXPECT_EQ(numerical_rank(s, 10, 10), 2u);
  EXPECT_EQ(numerical_rank(Vector::Zero(3), 3, 3), 0u);
}

TEST(Rng, SameStateSameDraws) {
  const DenseMatrix a = gen_gaussian({123, 4}, 17, 9, 0.5);
  const DenseMatrix b = gen_gaussian({123, 4}, 17, 9, 0.5);
  EXPECT_TRUE((a.array() == b.array()).all());
  const DenseMatrix c = gen_gaussian({123, 5}, 17, 9, 0.5);
  EXPECT_FALSE((a.array() == c.array()).all());
  EXPECT_EQ(gen_bernoulli_mask({3, 3}, 30, 30, 0.2), gen_bernoulli_mask({3, 3}, 30, 30, 0.2));
}

TEST(Rng, FixedDrawsArePinned) {
  // Guards against silent changes to the generator across platforms or refactors.
  Rng a({0, 0});
  Rng b({0, 0});
  for (int k = 0; k < 5; ++k) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_NE(RngState({1, 2}).substream(3).stream, RngState({1, 2}).substream(4).stream);
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
}

TEST(Rng, GaussianMoments) {
  const DenseMatrix g = gen_gaussian({2024, 0}, 100, 100, 1.0);
  const double mean = g.mean();
  const double sd = std::sqrt((g.array() - mean).square().sum() / static_cast<double>(g.size() - 1));
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(sd, 1.0, 0.05);
}

TEST(Rng, GaussianVarianceScaled) {
  const DenseMatrix g = gen_gaussian({2025, 0}, 100, 100, 1.0 / std::sqrt(500.0));
  const double mean = g.mean();
  const double var = (g.array() - mean).square().sum() / static_cast<double>(g.size() - 1);
  EXPECT_NEAR(var, 1.0 / 500.0, 0.1 / 500.0);
}

TEST(Rng, BernoulliMask) {
  EXPECT_TRUE(gen_bernoulli_mask({1, 1}, 20, 20, 0.0).empty());
  EXPECT_EQ(gen_bernoulli_mask({1, 1}, 20, 30, 1.0).size(), 600u);
  const SupportMask m = gen_bernoulli_mask({99, 0}, 200, 200, 0.1);
  EXPECT_NEAR(static_cast<double>(m.size()), 4000.0, 4.0 * 60.0);
}

TEST(Rng, UniformMaskHasExactCount) {
  const SupportMask m = gen_uniform_mask({5, 0}, 50, 40, 123);
  EXPECT_EQ(m.size(), 123u);
  EXPECT_EQ(gen_uniform_mask({5, 0}, 50, 40, 123), m);
  EXPECT_EQ(gen_uniform_mask({5, 0}, 3, 3, 9).size(), 9u);
}

TEST(SupportMask, SortedAndValidated) {
  const SupportMask m = SupportMask::from_entries(3, 3, {{2, 1}, {0, 2}, {0, 0}});
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m.entries()[0], SupportMask::Entry(0, 0));
  EXPECT_EQ(m.entries()[2], SupportMask::Entry(2, 1));
  EXPECT_TRUE(m.contains(0, 2));
  EXPECT_FALSE(m.contains(1, 1));
  EXPECT_EQ(m.complement().size(), 6u);
  EXPECT_EQ(SupportMask::from_indicator(m.indicator()), m);
  EXPECT_THROW(SupportMask::from_entries(3, 3, {{0, 0}, {0, 0}}), InvalidArgument);
  EXPECT_THROW(SupportMask::from_entries(3, 3, {{3, 0}}), InvalidArgument);
  EXPECT_THROW(SupportMask::from_entries(3, 3, {{0, -1}}), InvalidArgument);
}

TEST(Io, MatrixRoundTripIsExact) {
  const DenseMatrix m = gen_gaussian({55, 0}, 5, 7, 3.7);
  std::stringstream ss;
  write_matrix(ss, m);
  const DenseMatrix back = read_matrix(ss);
  ASSERT_EQ(back.rows(), 5);
  ASSERT_EQ(back.cols(), 7);
  EXPECT_TRUE((back.array() == m.array()).all());
}

TEST(Io, MaskRoundTrip) {
  const SupportMask m = gen_bernoulli_mask({8, 0}, 9, 11, 0.3);
  std::stringstream ss;
  write_mask(ss, m);
  EXPECT_EQ(read_mask(ss), m);
}

TEST(Io, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "pcp_io_roundtrip.pcpmat";
  const DenseMatrix m = gen_gaussian({56, 0}, 4, 3, 1e-300);
  write_matrix(path.string(), m);
  EXPECT_TRUE((read_matrix(path.string()).array() == m.array()).all());
  std::filesystem::remove(path);
  EXPECT_THROW(read_matrix(path.string()), Error);
}

TEST(Io, BodyShorterThanHeader) {
  std::istringstream in("pcpmat 1\n2 3\n1 2 3\n4 5\n");
  EXPECT_THROW(read_matrix(in), ParseError);
}

TEST(Io, BodyLongerThanHeader) {
  std::istringstream in("pcpmat 1\n1 2\n1 2\n3\n");
  EXPECT_THROW(read_matrix(in), ParseError);
}

TEST(Io, BadTokenReportsLine) {
  std::istringstream in("pcpmat 1\n2 2\n1 2\n3 x\n");
  try {
    read_matrix(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(Io, NonFiniteValueRejected) {
  std::istringstream in("pcpmat 1\n1 2\n1 nan\n");
  EXPECT_THROW(read_matrix(in), ParseError);
}

TEST(Io, WrongMagic) {
  std::istringstream in("pcpmask 1\n1 1\n1\n");
  EXPECT_THROW(read_matrix(in), ParseError);
}

TEST(Io, DuplicateMaskPair) {
  std::istringstream in("pcpmask 1\n3 3 3\n0 1\n2 2\n0 1\n");
  try {
    read_mask(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
  }
}

TEST(Io, MaskOutOfRangeAndCountMismatch) {
  std::istringstream a("pcpmask 1\n2 2 1\n2 0\n");
  EXPECT_THROW(read_mask(a), ParseError);
  std::istringstream b("pcpmask 1\n2 2 2\n0 0\n");
  EXPECT_THROW(read_mask(b), ParseError);
}
