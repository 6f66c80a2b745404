#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "bary/errors.hpp"
#include "bary/straighten.hpp"
#include "bary/volbounds.hpp"

namespace bary {
namespace {

const ModelSpace kH3 = ModelSpace::hyperbolic(3);

std::vector<Point> random_vertices(const ModelSpace& h, Rng& rng, int count, double radius) {
  std::vector<Point> v;
  for (int i = 0; i < count; ++i) v.push_back(h.random_point(rng, radius));
  return v;
}

TEST(SphSimplexPoint, Construction) {
  EXPECT_EQ(SphSimplexPoint::vertex(3, 2).coords(), Eigen::Vector4d(0, 0, 1, 0));
  EXPECT_NEAR(SphSimplexPoint::barycentric(3).coords().squaredNorm(), 1.0, 1e-15);
  EXPECT_NEAR(SphSimplexPoint::barycentric(3)[0], 0.5, 1e-15);
  Rng rng(51);
  for (int i = 0; i < 100; ++i) {
    const SphSimplexPoint p = SphSimplexPoint::random(rng, 4);
    EXPECT_EQ(p.k(), 4);
    EXPECT_GE(p.coords().minCoeff(), 0.0);
  }
  EXPECT_THROW(SphSimplexPoint(Eigen::Vector2d(0.6, 0.7)), ArgumentError);
  EXPECT_THROW(SphSimplexPoint(Eigen::Vector2d(-0.6, 0.8)), ArgumentError);
  EXPECT_THROW(SphSimplexPoint::vertex(2, 3), ArgumentError);
}

TEST(VertexSet, Validation) {
  const ModelSpace p = ModelSpace::product({{FactorKind::Hyperbolic, 2}, {FactorKind::Euclidean, 1}});
  EXPECT_THROW(VertexSet(p, {p.origin()}), UnsupportedSpaceError);
  EXPECT_THROW(VertexSet(kH3, {}), ArgumentError);
  EXPECT_THROW(VertexSet(kH3, {ModelSpace::hyperbolic(2).origin()}), ArgumentError);
  Rng rng(52);
  const VertexSet v(kH3, random_vertices(kH3, rng, 4, 1.0));
  EXPECT_EQ(v.face({1, 3}).k(), 1);
  EXPECT_THROW(v.face({3, 1}), ArgumentError);
  EXPECT_THROW(v.face({0, 4}), ArgumentError);
}

TEST(StEval, VertexInterpolation) {
  Rng rng(53);
  const VertexSet v(kH3, random_vertices(kH3, rng, 4, 2.0));
  const Straightener st(v);
  for (int i = 0; i < 4; ++i) EXPECT_LE(kH3.dist(st.eval(SphSimplexPoint::vertex(3, i)), v.points[i]), 1e-8);
}

TEST(StEval, CollapsedSimplexIsConstant) {
  Rng rng(54);
  const Point x = kH3.random_point(rng, 1.5);
  const Straightener st(VertexSet(kH3, {x, x, x}));
  for (int i = 0; i < 5; ++i) EXPECT_LE(kH3.dist(st.eval(SphSimplexPoint::random(rng, 2)), x), 1e-8);
}

TEST(StEval, SymmetricTriangleMapsToFixedAxis) {
  const double tilt = 1.1;
  std::vector<Point> pts;
  for (int i = 0; i < 3; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / 3.0;
    const Eigen::Vector3d u(std::cos(phi) * std::sin(tilt), std::sin(phi) * std::sin(tilt), std::cos(tilt));
    pts.push_back(kH3.exp_map(kH3.origin(), kH3.from_components(kH3.origin(), u), 1.5));
  }
  const Point image = st_eval(VertexSet(kH3, pts), SphSimplexPoint::barycentric(2));
  EXPECT_LE(image.coords.segment(1, 2).norm(), 1e-6);
  EXPECT_GT(image.coords[3], 0.1);
}

TEST(StEval, IsometryEquivariance) {
  for (int trial = 0; trial < 3; ++trial) {
    Rng rng = sample_rng(55, trial);
    const std::vector<Point> pts = random_vertices(kH3, rng, 4, 1.5);
    const Isometry g = kH3.random_isometry(rng, 0.5);
    std::vector<Point> moved;
    for (const Point& p : pts) moved.push_back(kH3.apply(g, p));
    const SphSimplexPoint delta = SphSimplexPoint::random(rng, 3);
    const Point a = kH3.apply(g, st_eval(VertexSet(kH3, pts), delta));
    const Point b = st_eval(VertexSet(kH3, moved), delta);
    EXPECT_LE(kH3.dist(a, b), 1e-6) << "trial " << trial;
  }
}

TEST(StFace, EdgeMatchesTwoVertexStraightening) {
  Rng rng(56);
  const VertexSet tri(kH3, random_vertices(kH3, rng, 3, 2.0));
  for (int trial = 0; trial < 5; ++trial) {
    const SphSimplexPoint e = SphSimplexPoint::random(rng, 1);
    const SphSimplexPoint on_edge(Eigen::Vector3d(e[0], 0.0, e[1]));
    const Point full = st_eval(tri, on_edge);
    const Point edge = st_eval(tri.face({0, 2}), e);
    EXPECT_LE(kH3.dist(full, edge), 1e-8);
    EXPECT_LE(kH3.dist(st_face(tri, {0, 2}, on_edge), edge), 1e-8);
  }
  EXPECT_LE(kH3.dist(st_face(tri, {1}, SphSimplexPoint::vertex(2, 1)), tri.points[1]), 1e-8);
  EXPECT_THROW(st_face(tri, {0, 1}, SphSimplexPoint::barycentric(2)), ArgumentError);
}

TEST(StFace, RandomTetrahedronFacets) {
  Rng rng(57);
  const VertexSet tet(kH3, random_vertices(kH3, rng, 4, 2.0));
  const Straightener whole(tet);
  for (int skip = 0; skip < 4; ++skip) {
    std::vector<int> face;
    for (int i = 0; i < 4; ++i)
      if (i != skip) face.push_back(i);
    const SphSimplexPoint f = SphSimplexPoint::random(rng, 2);
    Eigen::Vector4d a = Eigen::Vector4d::Zero();
    for (int j = 0; j < 3; ++j) a[face[j]] = f[j];
    EXPECT_LE(kH3.dist(whole.eval(SphSimplexPoint(a)), st_eval(tet.face(face), f)), 1e-8) << "facet " << skip;
  }
}

TEST(Jacobian, IdentitiesAndBoundOnRandomSimplex) {
  for (int trial = 0; trial < 5; ++trial) {
    Rng rng = sample_rng(58, trial);
    const Straightener st(VertexSet(kH3, random_vertices(kH3, rng, 4, 2.5)));
    const JacobianReport r = st.jacobian(SphSimplexPoint::random(rng, 3));
    EXPECT_NEAR(r.traceH, 1.0, 1e-8);
    EXPECT_NEAR(r.h.trace(), 1.0, 1e-8);
    EXPECT_LE(r.identityResidual, 1e-8);
    EXPECT_LE((r.h.matrix() + r.k.matrix() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE(r.firstOrderResidual, 1e-9);
    EXPECT_NEAR(r.ratio, det_ratio(r.h, r.k), 1e-12 * r.ratio);
    EXPECT_NEAR(r.rhs, 8.0 * r.ratio, 1e-12 * r.rhs);
    EXPECT_NEAR(r.globalBound, 8.0 * bcg_bound(3), 1e-12);
    EXPECT_LE(r.jacAbs, r.rhs * (1.0 + 1e-3));
    EXPECT_LE(r.rhs, r.globalBound * (1.0 + 1e-9));
    EXPECT_FALSE(r.degenerate);
  }
}

TEST(Jacobian, RepeatedVertexIsDegenerate) {
  Rng rng(59);
  std::vector<Point> pts = random_vertices(kH3, rng, 4, 2.0);
  pts[3] = pts[1];
  const JacobianReport r = jacobian(VertexSet(kH3, pts), SphSimplexPoint::barycentric(3));
  EXPECT_LE(r.jacAbs, 1e-6);
  const Point x = kH3.random_point(rng, 1.0);
  EXPECT_LE(jacobian(VertexSet(kH3, {x, x, x, x}), SphSimplexPoint::random(rng, 3)).jacAbs, 1e-6);
}

TEST(Jacobian, RequiresFullDimensionalSimplex) {
  Rng rng(60);
  const VertexSet tri(kH3, random_vertices(kH3, rng, 3, 1.0));
  EXPECT_THROW(jacobian(tri, SphSimplexPoint::barycentric(2)), ArgumentError);
}

TEST(JacScan, BoundsHoldAndRunIsDeterministic) {
  JacScanOptions opts;
  opts.keepSamples = false;
  const JacScanSummary s = jac_scan(3, 30, 7, opts);
  EXPECT_EQ(s.samples, 30);
  EXPECT_LE(s.maxRatio, bcg_bound(3) * (1.0 + 1e-9));
  EXPECT_LE(s.maxJacAbs, 8.0 * bcg_bound(3));
  EXPECT_LE(s.maxTightness, 1.0 + 1e-3);
  EXPECT_LE(s.maxTraceError, 1e-8);
  EXPECT_LE(s.maxIdentityResidual, 1e-8);
  EXPECT_LE(s.maxFirstOrderResidual, 1e-9);
  int total = 0;
  for (int c : s.histogram) total += c;
  EXPECT_EQ(total, 30);
  EXPECT_TRUE(s.records.empty());

  const JacScanSummary again = jac_scan(3, 30, 7, opts);
  EXPECT_EQ(again.maxJacAbs, s.maxJacAbs);
  EXPECT_EQ(again.histogram, s.histogram);
}

TEST(JacScan, CollapsedVerticesGiveZeroJacobian) {
  JacScanOptions opts;
  opts.radius = 0.0;
  EXPECT_LE(jac_scan(3, 10, 3, opts).maxJacAbs, 1e-6);
}

TEST(JacScan, ArgumentErrors) {
  EXPECT_THROW(jac_scan(2, 20, 1), ArgumentError);
  EXPECT_THROW(jac_scan(3, 5, 1), ArgumentError);
  JacScanOptions opts;
  opts.grid = SphereGrid::default_for(4);
  EXPECT_THROW(jac_scan(3, 10, 1, opts), ArgumentError);
}

}  // namespace
}  // namespace bary
