#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "bary/busemann.hpp"
#include "bary/errors.hpp"
#include "bary/oracles.hpp"

namespace bary {
namespace {

ModelSpace h2xr() { return ModelSpace::product({{FactorKind::Hyperbolic, 2}, {FactorKind::Euclidean, 1}}); }
ModelSpace h2xh2() { return ModelSpace::product({{FactorKind::Hyperbolic, 2}, {FactorKind::Hyperbolic, 2}}); }
ModelSpace r2xh3() { return ModelSpace::product({{FactorKind::Euclidean, 2}, {FactorKind::Hyperbolic, 3}}); }

std::vector<ModelSpace> spaces() {
  return {ModelSpace::hyperbolic(2), ModelSpace::hyperbolic(3), ModelSpace::hyperbolic(4), h2xr(), h2xh2(), r2xh3()};
}

TEST(Busemann, VanishesAtBasepoint) {
  for (const ModelSpace& s : spaces()) {
    for (int i = 0; i < 20; ++i) {
      Rng rng = sample_rng(1, i);
      EXPECT_NEAR(busemann(s, s.origin(), random_boundary_point(s, rng)), 0.0, 1e-15) << s.name();
    }
  }
}

TEST(Busemann, MinusArcLengthAlongTheRay) {
  for (const ModelSpace& s : spaces()) {
    Rng rng(2);
    const Tangent v = s.random_unit_tangent(rng, s.origin());
    const BoundaryPoint theta = boundary_toward(s, v);
    for (double t : {0.5, 2.0, 5.0, 10.0}) EXPECT_NEAR(busemann(s, s.exp_map(s.origin(), v, t), theta), -t, 1e-10) << s.name();
  }
}

TEST(Busemann, ClosedFormMatchesDefiningLimit) {
  for (const ModelSpace& s : spaces()) {
    for (int i = 0; i < 100; ++i) {
      Rng rng = sample_rng(3, i);
      const Point x = s.random_point(rng, 3.0);
      const BoundaryPoint theta = random_boundary_point(s, rng);
      EXPECT_NEAR(busemann(s, x, theta), oracle::busemann_limit(s, x, theta), 1e-8) << s.name();
    }
  }
}

TEST(Busemann, CocycleMatchesLimitDifference) {
  for (const ModelSpace& s : spaces()) {
    for (int i = 0; i < 50; ++i) {
      Rng rng = sample_rng(4, i);
      const Point x = s.random_point(rng, 2.0), y = s.random_point(rng, 2.0);
      const BoundaryPoint theta = random_boundary_point(s, rng);
      const double closed = busemann(s, x, theta) - busemann(s, y, theta);
      const double limit = oracle::busemann_limit(s, x, theta) - oracle::busemann_limit(s, y, theta);
      EXPECT_NEAR(closed, limit, 1e-8) << s.name();
      EXPECT_NEAR(busemann(s, x, theta, y), closed, 1e-12) << s.name();
    }
  }
}

TEST(Busemann, GradientIsUnitKernelOfHessianAndPointsAway) {
  for (const ModelSpace& s : spaces()) {
    for (int i = 0; i < 100; ++i) {
      Rng rng = sample_rng(5, i);
      const Point x = s.random_point(rng, 3.0);
      const BoundaryPoint theta = random_boundary_point(s, rng);
      const BusemannEval e = evaluate_busemann(s, x, theta);
      const Eigen::VectorXd g = s.components(e.gradient);
      EXPECT_NEAR(g.norm(), 1.0, 1e-9) << s.name();
      EXPECT_LE((e.hessian.matrix() * g).norm(), 1e-8) << s.name();
      EXPECT_GE(e.hessian.min_eigenvalue(), -1e-9) << s.name();
      EXPECT_LE((g + s.components(direction_to(s, x, theta))).norm(), 1e-12) << s.name();
    }
  }
}

TEST(Busemann, DerivativesMatchFiniteDifferences) {
  for (const ModelSpace& s : spaces()) {
    for (int i = 0; i < 20; ++i) {
      Rng rng = sample_rng(6, i);
      const Point x = s.random_point(rng, 2.0);
      const BoundaryPoint theta = random_boundary_point(s, rng);
      auto f = [&](const Point& y) { return busemann(s, y, theta); };
      const Eigen::VectorXd fd_g = oracle::fd_gradient(s, x, f);
      EXPECT_LE((fd_g - s.components(grad_busemann(s, x, theta))).cwiseAbs().maxCoeff(), 1e-6) << s.name();
      const Eigen::MatrixXd fd_h = oracle::fd_hessian(s, x, f);
      EXPECT_LE((fd_h - hess_busemann(s, x, theta).matrix()).cwiseAbs().maxCoeff(), 1e-4) << s.name();
    }
  }
}

TEST(Busemann, HyperbolicHessianSpectrumAndMatrixIdentity) {
  for (int n : {2, 3, 5}) {
    const ModelSpace h = ModelSpace::hyperbolic(n);
    for (int i = 0; i < 50; ++i) {
      Rng rng = sample_rng(7, i);
      const Point x = h.random_point(rng, 3.0);
      const BoundaryPoint theta = random_boundary_point(h, rng);
      const SymOp hess = hess_busemann(h, x, theta);
      EXPECT_NEAR(hess.eigenvalues()[0], 0.0, 1e-10);
      for (int j = 1; j < n; ++j) EXPECT_NEAR(hess.eigenvalues()[j], 1.0, 1e-10);
      const Eigen::VectorXd g = h.components(grad_busemann(h, x, theta));
      const Eigen::MatrixXd id = g * g.transpose() + hess.matrix();
      EXPECT_LE((id - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-8);

      auto f = [&](const Point& y) { return busemann(h, y, theta); };
      const Eigen::VectorXd fd_g = oracle::fd_gradient(h, x, f);
      const Eigen::MatrixXd fd_id = fd_g * fd_g.transpose() + oracle::fd_hessian(h, x, f);
      EXPECT_LE((fd_id - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-4);
    }
  }
}

TEST(Busemann, ProductHessianBlocks) {
  const ModelSpace s = h2xr();
  Rng rng(8);
  const Point x = s.random_point(rng, 2.0);
  const BoundaryPoint hyp = boundary_toward(s, s.from_components(x, Eigen::Vector3d(1, 0, 0)));
  const SymOp h = hess_busemann(s, x, hyp);
  EXPECT_NEAR(h.eigenvalues()[0], 0.0, 1e-10);
  EXPECT_NEAR(h.eigenvalues()[1], 0.0, 1e-10);
  EXPECT_NEAR(h.eigenvalues()[2], 1.0, 1e-10);
}

TEST(Busemann, MalformedBoundaryPointsRejected) {
  const ModelSpace h = ModelSpace::hyperbolic(3);
  BoundaryPoint bad{Eigen::Vector4d(1.0, 0.5, 0.0, 0.0), Eigen::VectorXd::Ones(1)};
  EXPECT_THROW(check_boundary_point(h, bad), ArgumentError);
  BoundaryPoint short_coords{Eigen::Vector3d(1.0, 1.0, 0.0), Eigen::VectorXd::Ones(1)};
  EXPECT_THROW(check_boundary_point(h, short_coords), ArgumentError);
}

TEST(Invariants, UOfXOnModels) {
  Rng rng(9);
  for (int n : {2, 3, 4}) {
    const ModelSpace h = ModelSpace::hyperbolic(n);
    EXPECT_NEAR(u_of_x(h, h.random_point(rng, 2.0)), 1.0, 1e-8) << "n=" << n;
  }
  EXPECT_NEAR(u_of_x(h2xr(), h2xr().random_point(rng, 2.0)), 0.0, 1e-8);
  EXPECT_NEAR(u_of_x(h2xh2(), h2xh2().random_point(rng, 2.0)), 0.0, 1e-8);
  EXPECT_THROW(u_of_x(h2xr(), h2xr().origin(), UOfXOptions{50, 3, 0}), ArgumentError);
}

TEST(Invariants, UOfXIsIsometryInvariant) {
  for (const ModelSpace& s : {ModelSpace::hyperbolic(3), h2xr(), h2xh2()}) {
    for (int i = 0; i < 5; ++i) {
      Rng rng = sample_rng(10, i);
      const Point x = s.random_point(rng, 2.0);
      const Isometry g = s.random_isometry(rng, 1.0);
      EXPECT_NEAR(u_of_x(s, s.apply(g, x)), u_of_x(s, x), 1e-8) << s.name();
    }
  }
}

TEST(Invariants, RicciKOnModels) {
  for (int n : {2, 3, 5}) {
    const ModelSpace h = ModelSpace::hyperbolic(n);
    Rng rng(11);
    const Point x = h.random_point(rng, 2.0);
    const Tangent v = h.random_unit_tangent(rng, x);
    for (int k = 1; k <= n; ++k) EXPECT_NEAR(ric_k(h, v, k), -(k - 1.0), 1e-10) << "n=" << n << " k=" << k;
  }
  const ModelSpace p = h2xh2();
  const Point y = p.origin();
  EXPECT_NEAR(ric_k(p, p.from_components(y, Eigen::Vector4d(1, 0, 0, 0)), 2), 0.0, 1e-12);
  EXPECT_NEAR(ric_k(p, p.from_components(y, Eigen::Vector4d(1, 0, 0, 0)), 3), 0.0, 1e-12);
  EXPECT_NEAR(ric_k(p, p.from_components(y, Eigen::Vector4d(1, 0, 0, 0)), 4), -1.0, 1e-12);
  for (const ModelSpace& s : spaces()) {
    Rng rng(12);
    const Point x = s.random_point(rng, 2.0);
    EXPECT_NEAR(ric_k(s, s.random_unit_tangent(rng, x), 1), 0.0, 1e-12) << s.name();
  }
}

TEST(Invariants, RankPlusAgreesWithParallelJacobiFields) {
  struct Case {
    ModelSpace space;
    Eigen::VectorXd v;
    int expected;
  };
  const std::vector<Case> cases{
      {ModelSpace::hyperbolic(3), Eigen::Vector3d(0.6, 0.0, 0.8), 1},
      {h2xr(), Eigen::Vector3d(0, 0, 1), 3},
      {h2xr(), Eigen::Vector3d(1, 0, 0), 2},
      {h2xh2(), Eigen::Vector4d(0, 1, 0, 0), 3},
      {h2xh2(), Eigen::Vector4d(1, 0, 1, 0) / std::sqrt(2.0), 2},
  };
  for (const Case& c : cases) {
    const Point x = c.space.origin();
    const Tangent v = c.space.from_components(x, c.v);
    const BoundaryPoint theta = boundary_toward(c.space, v);
    EXPECT_EQ(rank_plus(c.space, x, theta), c.expected) << c.space.name();
    EXPECT_EQ(1 + oracle::parallel_jacobi_count(c.space, direction_to(c.space, x, theta)), c.expected)
        << c.space.name();
  }
}

TEST(Invariants, TraceTwoRankEquivalence) {
  for (const ModelSpace& s : spaces()) {
    for (int i = 0; i < 1000; ++i) {
      Rng rng = sample_rng(13, i);
      const Point x = s.random_point(rng, 2.0);
      const BoundaryPoint theta = random_boundary_point(s, rng, 0.5);
      ASSERT_TRUE(tr2_rank_equivalence(s, x, theta)) << s.name() << " sample " << i;
    }
  }
}

}  // namespace
}  // namespace bary
