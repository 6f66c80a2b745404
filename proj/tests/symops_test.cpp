#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "bary/errors.hpp"
#include "bary/oracles.hpp"
#include "bary/random.hpp"
#include "bary/symops.hpp"

namespace bary {
namespace {

Eigen::MatrixXd random_psd(Rng& rng, int n, int rank) {
  const Eigen::MatrixXd g = gaussian_matrix(rng, n, rank);
  return g * g.transpose();
}

// Sum of the k smallest singular values; for a semidefinite matrix these are
// the |eigenvalues| closest to zero.
double smallest_singular_sum(const Eigen::MatrixXd& a, int k) {
  Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues();
  std::sort(s.data(), s.data() + s.size());
  return s.head(k).sum();
}

TEST(SymOp, RejectsAsymmetricEntries) {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0, 2.0 + 1e-9, 1.0;
  EXPECT_THROW(SymOp{m}, ArgumentError);
  EXPECT_THROW(SymOp{Eigen::MatrixXd::Zero(2, 3)}, ArgumentError);
}

TEST(SymOp, DefinitenessToleranceIsRelative) {
  EXPECT_TRUE(SymOp::diagonal(Eigen::Vector2d(1.0, -1e-12)).is_psd());
  EXPECT_FALSE(SymOp::diagonal(Eigen::Vector2d(1.0, -1e-8)).is_psd());
  EXPECT_TRUE(SymOp::diagonal(Eigen::Vector2d(-3.0, 0.0)).is_nsd());
  EXPECT_TRUE(SymOp::identity(4).is_pd());
  EXPECT_EQ(SymOp::zero(3).definiteness(), Definiteness::Zero);
  EXPECT_EQ(SymOp::diagonal(Eigen::Vector2d(1.0, -1.0)).definiteness(), Definiteness::Indefinite);
}

TEST(TraceK, DiagonalExamples) {
  EXPECT_DOUBLE_EQ(trace_k(SymOp::diagonal(Eigen::Vector3d(0.0, 1.0, 3.0)), 2), 1.0);
  EXPECT_DOUBLE_EQ(trace_k(SymOp::diagonal(Eigen::Vector3d(0.0, -2.0, -5.0)), 2), -2.0);
}

TEST(TraceK, Errors) {
  const SymOp a = SymOp::diagonal(Eigen::Vector3d(0.0, 1.0, 3.0));
  EXPECT_THROW(trace_k(a, 0), ArgumentError);
  EXPECT_THROW(trace_k(a, 4), ArgumentError);
  EXPECT_THROW(trace_k(SymOp::diagonal(Eigen::Vector3d(-1.0, 1.0, 3.0)), 1), DefinitenessError);
}

TEST(TraceK, MatchesSubspaceBruteForce5x5) {
  Rng rng(11);
  const Eigen::MatrixXd a = random_psd(rng, 5, 5);
  const double tk = trace_k(SymOp(a), 2);
  const oracle::KyFanResult brute = oracle::ky_fan_brute(a, 2, true, 100000, rng);
  EXPECT_GE(brute.sampled, tk - 1e-10);
  EXPECT_GE(brute.refined, tk - 1e-10);
  EXPECT_LE(brute.refined - tk, 1e-6);
}

TEST(TraceK, NsdMatchesSubspaceBruteForce) {
  Rng rng(12);
  const Eigen::MatrixXd a = -random_psd(rng, 6, 4);
  for (int k = 1; k <= 6; ++k) {
    const double tk = trace_k(SymOp(a), k);
    const oracle::KyFanResult brute = oracle::ky_fan_brute(a, k, false, 20000, rng);
    EXPECT_LE(brute.sampled, tk + 1e-10) << "k=" << k;
    EXPECT_NEAR(brute.refined, tk, 1e-6) << "k=" << k;
  }
}

TEST(TraceK, KyFanIdentityProperty) {
  for (int trial = 0; trial < 200; ++trial) {
    Rng rng = sample_rng(5, trial);
    const int n = 1 + trial % 8;
    const int rank = 1 + static_cast<int>(rng() % n);
    Eigen::MatrixXd a = random_psd(rng, n, rank);
    const bool nsd = trial % 2;
    if (nsd) a = -a;
    const SymOp op(a);
    for (int k = 1; k <= n; ++k) {
      const double expected = (nsd ? -1.0 : 1.0) * smallest_singular_sum(a, k);
      EXPECT_NEAR(trace_k(op, k), expected, 1e-10 * std::max(1.0, a.norm())) << "trial " << trial;
    }
  }
}

TEST(TraceK, MonotoneInKAndFullTrace) {
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng = sample_rng(6, trial);
    const int n = 2 + trial % 7;
    const SymOp a(random_psd(rng, n, n));
    for (int k = 1; k < n; ++k) EXPECT_LE(trace_k(a, k), trace_k(a, k + 1));
    EXPECT_NEAR(trace_k(a, n), a.trace(), 1e-10 * std::max(1.0, std::abs(a.trace())));
  }
}

TEST(DetRatio, Examples) {
  const SymOp h = SymOp::identity(3) * (1.0 / 3.0);
  const SymOp k = SymOp::identity(3) * (2.0 / 3.0);
  EXPECT_NEAR(det_ratio(h, k), std::pow(3.0, 1.5) / 8.0, 1e-15);
  EXPECT_NEAR(det_ratio(h, k), 0.649519, 1e-6);
  EXPECT_EQ(det_ratio(SymOp::diagonal(Eigen::Vector3d(0.5, 0.5, 0.0)), k), 0.0);
  EXPECT_THROW(det_ratio(h, SymOp::diagonal(Eigen::Vector3d(1.0, 1.0, 0.0))), DefinitenessError);
}

TEST(DetRatio, ScalingLaw) {
  for (int trial = 0; trial < 50; ++trial) {
    Rng rng = sample_rng(7, trial);
    const int n = 2 + trial % 6;
    const SymOp h(random_psd(rng, n, n));
    const SymOp k(random_psd(rng, n, n) + 0.1 * Eigen::MatrixXd::Identity(n, n));
    const double r = det_ratio(h, k);
    EXPECT_NEAR(det_ratio(h, k * 2.0), std::pow(2.0, -n) * r, 1e-10 * r);
  }
}

TEST(DetRatio, NonincreasingUnderPsdExcess) {
  for (int trial = 0; trial < 200; ++trial) {
    Rng rng = sample_rng(8, trial);
    const int n = 3 + trial % 5;
    const SymOp h(random_psd(rng, n, n));
    const SymOp k(random_psd(rng, n, n) + 0.05 * Eigen::MatrixXd::Identity(n, n));
    const SymOp p(random_psd(rng, n, 1 + trial % n));
    EXPECT_LE(det_ratio(h, k + p), det_ratio(h, k) * (1.0 + 1e-12));
  }
}

TEST(BcgBound, Values) {
  EXPECT_NEAR(bcg_bound(3), 0.6495190528, 1e-10);
  EXPECT_NEAR(bcg_bound(4), 16.0 / 81.0, 1e-15);
  EXPECT_NEAR(bcg_bound(8), 4096.0 / 5764801.0, 1e-18);
  EXPECT_THROW(bcg_bound(2), ArgumentError);
}

TEST(BcgCheck, ExtremalConfigurationIsEquality) {
  for (int n = 3; n <= 8; ++n) {
    const SymOp h = SymOp::identity(n) * (1.0 / n);
    const SymOp k = SymOp::identity(n) * ((n - 1.0) / n);
    const BcgReport r = bcg_check(h, k);
    EXPECT_TRUE(r.hypothesesHold);
    EXPECT_TRUE(r.holds);
    EXPECT_NEAR(r.ratio, r.bound, 1e-12 * r.bound) << "n=" << n;
  }
}

TEST(BcgCheck, ReportsHypothesisFailures) {
  const SymOp h = SymOp::identity(3) * 0.5;
  const BcgReport r = bcg_check(h, SymOp::identity(3));
  EXPECT_FALSE(r.traceOne);
  EXPECT_FALSE(r.hypothesesHold);

  const SymOp h1 = SymOp::identity(3) * (1.0 / 3.0);
  const BcgReport r2 = bcg_check(h1, SymOp::identity(3) * 0.5);
  EXPECT_FALSE(r2.sumDominatesIdentity);
  EXPECT_FALSE(r2.hypothesesHold);
}

TEST(BcgCheck, RandomPairsSatisfyHypotheses) {
  for (int trial = 0; trial < 1000; ++trial) {
    Rng rng = sample_rng(9, trial);
    const int n = 3 + trial % 6;
    const auto [h, k] = random_bcg_pair(rng, n);
    const BcgReport r = bcg_check(h, k);
    ASSERT_TRUE(r.hypothesesHold) << "trial " << trial;
    EXPECT_TRUE(r.holds) << "trial " << trial;
  }
}

TEST(BcgFuzz, HoldsForDimensionsThreeToEight) {
  for (int n = 3; n <= 8; ++n) {
    const BcgFuzzSummary s = bcg_fuzz(n, 10000, 42);
    EXPECT_EQ(s.samples, 10000);
    EXPECT_LE(s.maxRatio, bcg_bound(n) * (1.0 + 1e-9)) << "n=" << n;
    EXPECT_LE(s.maxTightness, 1.0 + 1e-9);
  }
  EXPECT_THROW(bcg_fuzz(2, 10, 0), ArgumentError);
}

TEST(BcgTwoDim, FamilyIsUnbounded) {
  for (double eps : {1e-1, 1e-3, 1e-5, 1e-7}) {
    const SymOp h = SymOp::diagonal(Eigen::Vector2d(1.0 - eps, eps));
    const SymOp k = SymOp::diagonal(Eigen::Vector2d(eps, 1.0 - eps));
    EXPECT_NEAR(bcg_two_dim_ratio(eps), det_ratio(h, k), 1e-9 * det_ratio(h, k));
    EXPECT_NEAR(bcg_two_dim_ratio(eps), 1.0 / std::sqrt(eps * (1.0 - eps)), 1e-9 / std::sqrt(eps));
  }
  EXPECT_GT(bcg_two_dim_ratio(1e-7), 1e3);
}

TEST(BcgExtremize, AttainsBoundAtScalarPair) {
  for (int n : {3, 5}) {
    const BcgExtremum e = bcg_extremize(n, 1);
    EXPECT_NEAR(e.ratio, bcg_bound(n), 1e-6) << "n=" << n;
    const Eigen::MatrixXd dh = e.h.matrix() - Eigen::MatrixXd::Identity(n, n) / n;
    const Eigen::MatrixXd dk = e.k.matrix() - Eigen::MatrixXd::Identity(n, n) * ((n - 1.0) / n);
    EXPECT_LE(Eigen::JacobiSVD<Eigen::MatrixXd>(dh).singularValues()[0], 1e-3);
    EXPECT_LE(Eigen::JacobiSVD<Eigen::MatrixXd>(dk).singularValues()[0], 1e-3);
  }
  EXPECT_THROW(bcg_extremize(2, 1), ArgumentError);
}

TEST(BcgExtremize, StationaryAtExtremizer) {
  const BcgExtremum e = bcg_extremize_from(SymOp::identity(4) * 0.25);
  EXPECT_EQ(e.acceptedSteps, 0);
  EXPECT_NEAR(e.ratio, bcg_bound(4), 1e-12);
}

}  // namespace
}  // namespace bary
