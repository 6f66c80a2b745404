#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "bary/boundary.hpp"
#include "bary/busemann.hpp"
#include "bary/errors.hpp"
#include "bary/oracles.hpp"

namespace bary {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(GaussLegendre, ExactForLowDegreePolynomials) {
  for (int count : {1, 2, 5, 12, 40}) {
    Eigen::VectorXd x, w;
    gauss_legendre(count, x, w);
    ASSERT_EQ(x.size(), count);
    for (int p = 0; p < 2 * count; ++p) {
      const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
      EXPECT_NEAR((w.array() * x.array().pow(p)).sum(), exact, 1e-13) << "count " << count << " degree " << p;
    }
  }
}

TEST(SphereGrid, WeightsSumToRoundVolume) {
  for (int n = 2; n <= 6; ++n) {
    const GridPtr g = SphereGrid::default_for(n);
    EXPECT_EQ(g->sphere_dim(), n - 1);
    EXPECT_GT(g->weights().minCoeff(), 0.0);
    EXPECT_NEAR(g->weights().sum(), oracle::shell_sphere_volume(n - 1), 1e-9) << "n=" << n;
    EXPECT_LE((g->directions().colwise().norm().array() - 1.0).abs().maxCoeff(), 1e-14);
  }
}

TEST(SphereGrid, IntegratesLowDegreeMonomials) {
  for (int n : {2, 3, 4, 5}) {
    const GridPtr g = SphereGrid::default_for(n);
    const double omega = oracle::shell_sphere_volume(n - 1);
    const Eigen::MatrixXd& s = g->directions();
    const Eigen::VectorXd& w = g->weights();
    for (int i = 0; i < n; ++i) {
      EXPECT_NEAR(w.dot(s.row(i).transpose()), 0.0, 1e-9);
      EXPECT_NEAR(w.dot(s.row(i).transpose().array().square().matrix()), omega / n, 1e-9);
      EXPECT_NEAR(w.dot(s.row(i).transpose().array().pow(4).matrix()), 3.0 * omega / (n * (n + 2.0)), 1e-9);
      for (int j = 0; j < i; ++j)
        EXPECT_NEAR(w.dot(s.row(i).transpose().cwiseProduct(s.row(j).transpose())), 0.0, 1e-9);
    }
  }
}

TEST(SphereGrid, ParsesSpecs) {
  const GridPtr g = SphereGrid::parse("gl:12x24", 2);
  EXPECT_EQ(g->size(), 288u);
  EXPECT_EQ(g->spec(), "gl:12x24");
  EXPECT_EQ(g->hyperbolic_dim(), 3);
  EXPECT_TRUE(*g == *SphereGrid::make(2, {12, 24}));
  EXPECT_THROW(SphereGrid::parse("gl:12", 2), ArgumentError);
  EXPECT_THROW(SphereGrid::parse("lebedev:12x24", 2), ArgumentError);
  EXPECT_THROW(SphereGrid::parse("gl:12xx", 2), ArgumentError);
  EXPECT_THROW(SphereGrid::parse("gl:0x8", 2), ArgumentError);
}

TEST(SphereGrid, NodesAreIdealPoints) {
  const GridPtr g = SphereGrid::default_for(3);
  const ModelSpace h = ModelSpace::hyperbolic(3);
  for (std::size_t j = 0; j < g->size(); j += 97) EXPECT_NO_THROW(check_boundary_point(h, g->node(j)));
}

TEST(SphereGrid, RichardsonOrderAtLeastFour) {
  // The integral of exp(c <s, u>) over S^2 is 4 pi sinh(c) / c for any unit u,
  // and over S^3 it is 4 pi^2 I_1(c) / c.
  const double c = 1.7;
  const Eigen::Vector3d u = Eigen::Vector3d(0.48, -0.6, 0.64).normalized();
  const double exact2 = 4.0 * kPi * std::sinh(c) / c;
  auto sum2 = [&](const GridPtr& g) {
    double v = 0.0;
    for (std::size_t j = 0; j < g->size(); ++j) v += g->weights()[j] * std::exp(c * g->directions().col(j).dot(u));
    return v;
  };
  EXPECT_NEAR(sum2(SphereGrid::make(2, {96, 192})), exact2, 1e-10 * exact2);
  const GridPtr g3 = SphereGrid::make(3, {48, 48, 96});
  const Eigen::Vector4d u3 = Eigen::Vector4d(0.5, 0.5, -0.5, 0.5);
  double v3 = 0.0;
  for (std::size_t j = 0; j < g3->size(); ++j) v3 += g3->weights()[j] * std::exp(c * g3->directions().col(j).dot(u3));
  const double exact3 = 4.0 * kPi * kPi * std::cyl_bessel_i(1.0, c) / c;
  EXPECT_NEAR(v3, exact3, 1e-10 * exact3);

  std::vector<double> errors;
  for (int m : {2, 4, 8, 16}) errors.push_back(std::abs(sum2(SphereGrid::make(2, {m, 2 * m})) - exact2));
  ASSERT_GT(errors[1], 1e-12);
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (errors[i] < 1e-12) break;
    EXPECT_GE(std::log2(errors[i - 1] / errors[i]), 4.0) << "refinement " << i;
  }
}

TEST(BoundaryMeasure, RejectsBadDensities) {
  const GridPtr g = SphereGrid::make(1, {8});
  EXPECT_THROW(BoundaryMeasure(g, Eigen::VectorXd::Ones(7)), ArgumentError);
  Eigen::VectorXd d = Eigen::VectorXd::Ones(8);
  d[3] = 0.0;
  EXPECT_THROW(BoundaryMeasure(g, d), ArgumentError);
  d[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(BoundaryMeasure(g, d), ArgumentError);
}

TEST(VisualMeasure, AtOriginIsUniform) {
  for (int n : {2, 3, 4}) {
    const ModelSpace h = ModelSpace::hyperbolic(n);
    const GridPtr g = SphereGrid::default_for(n);
    const BoundaryMeasure nu = visual_measure(h, g, h.origin());
    const BoundaryMeasure u = uniform_measure(g);
    EXPECT_NEAR(nu.mass(), 1.0, 1e-12);
    EXPECT_LE((nu.density() - u.density()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE(nu.mean_direction().norm(), 1e-12);
    EXPECT_EQ(volume_entropy(h), n - 1.0);
  }
}

TEST(VisualMeasure, CocycleAgainstBusemannDifference) {
  const ModelSpace h = ModelSpace::hyperbolic(3);
  const GridPtr g = SphereGrid::default_for(3);
  Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const Point x = h.random_point(rng, 1.5), y = h.random_point(rng, 1.5);
    const BoundaryMeasure nx = visual_measure(h, g, x), ny = visual_measure(h, g, y);
    Eigen::VectorXd scaled(g->size());
    for (std::size_t j = 0; j < g->size(); ++j) {
      const BoundaryPoint th = g->node(j);
      const double expected = std::exp(-2.0 * (busemann(h, x, th) - busemann(h, y, th)));
      scaled[j] = nx.density()[j] / ny.density()[j] / expected;
    }
    EXPECT_LE((scaled.array() / scaled[0] - 1.0).abs().maxCoeff(), 1e-8);
  }
}

TEST(VisualMeasure, MeanDirectionPointsTowardTheCenter) {
  const ModelSpace h = ModelSpace::hyperbolic(3);
  const GridPtr g = SphereGrid::default_for(3);
  Rng rng(22);
  for (int trial = 0; trial < 5; ++trial) {
    const Point x = h.random_point(rng, 2.0);
    const Eigen::VectorXd m = visual_measure(h, g, x).mean_direction();
    const Eigen::VectorXd toward = x.coords.tail(3).normalized();
    EXPECT_LE((m.normalized() - toward).norm(), 1e-8);
  }
  const Tangent v = h.random_unit_tangent(rng, h.origin());
  double last = 0.0;
  for (double t : {0.25, 0.5, 1.0, 2.0, 3.0}) {
    const double len = visual_measure(h, g, h.exp_map(h.origin(), v, t)).mean_direction().norm();
    EXPECT_GT(len, last) << "t=" << t;
    last = len;
  }
}

TEST(VisualMeasure, QuadratureMassErrorOnDefaultGrids) {
  Rng rng(23);
  for (int n : {2, 3, 4}) {
    const ModelSpace h = ModelSpace::hyperbolic(n);
    const GridPtr g = SphereGrid::default_for(n);
    EXPECT_LE(visual_mass_error(h, g, h.origin()), 1e-9);
    EXPECT_LE(visual_mass_error(h, g, h.random_point(rng, 1.0)), 1e-9) << "n=" << n;
  }
}

TEST(VisualMeasure, RejectsUnsupportedSpaces) {
  const ModelSpace p = ModelSpace::product({{FactorKind::Hyperbolic, 2}, {FactorKind::Euclidean, 1}});
  EXPECT_THROW(visual_measure(p, SphereGrid::default_for(3), p.origin()), UnsupportedSpaceError);
  const ModelSpace h = ModelSpace::hyperbolic(3);
  EXPECT_THROW(visual_measure(h, SphereGrid::default_for(2), h.origin()), ArgumentError);
}

TEST(VisualMeasure, Equivariance) {
  const ModelSpace h = ModelSpace::hyperbolic(3);
  const GridPtr g = SphereGrid::default_for(3);
  for (int trial = 0; trial < 5; ++trial) {
    Rng rng = sample_rng(24, trial);
    const Point x = h.random_point(rng, 1.0);
    const Isometry gam = h.random_isometry(rng, 0.5);
    const BoundaryMeasure nx = visual_measure(h, g, x);
    const BoundaryMeasure ngx = visual_measure(h, g, h.apply(gam, x));
    auto moment = [](const Eigen::VectorXd& s) -> Eigen::VectorXd {
      Eigen::VectorXd m(9);
      m << s, s[0] * s[1], s[1] * s[2], s[0] * s[2], s[0] * s[0], s[1] * s[1], s[0] * s[0] * s[0];
      return m;
    };
    Eigen::VectorXd pushed = Eigen::VectorXd::Zero(9), direct = Eigen::VectorXd::Zero(9);
    for (std::size_t j = 0; j < g->size(); ++j) {
      const BoundaryPoint moved = h.apply(gam, g->node(j));
      pushed += nx.node_mass()[j] * moment(moved.coords.tail(3) / moved.coords[0]);
      direct += ngx.node_mass()[j] * moment(g->directions().col(j));
    }
    EXPECT_LE((pushed - direct).cwiseAbs().maxCoeff(), 1e-6) << "trial " << trial;
  }
}

TEST(Combine, LinearityAndIdentities) {
  const ModelSpace h = ModelSpace::hyperbolic(3);
  const GridPtr g = SphereGrid::default_for(3);
  Rng rng(25);
  const BoundaryMeasure a = visual_measure(h, g, h.random_point(rng, 1.0));
  const BoundaryMeasure b = visual_measure(h, g, h.random_point(rng, 1.0));
  const BoundaryMeasure c = visual_measure(h, g, h.random_point(rng, 1.0));

  const BoundaryMeasure single = combine(Eigen::Vector3d(0.0, 1.0, 0.0), {a, b, c});
  EXPECT_LE((single.density() - b.density()).cwiseAbs().maxCoeff(), 1e-15);
  const BoundaryMeasure same = combine(Eigen::Vector2d(1.0, 1.0) / std::sqrt(2.0), {a, a});
  EXPECT_LE((same.density() - a.density()).cwiseAbs().maxCoeff(), 1e-12);

  const Eigen::Vector3d w = Eigen::Vector3d(0.3, 0.5, 0.8).normalized();
  const BoundaryMeasure mix = combine(w, {a, b, c});
  EXPECT_NEAR(mix.mass(), 1.0, 1e-12);
  const Eigen::VectorXd expected = w[0] * w[0] * a.density() + w[1] * w[1] * b.density() + w[2] * w[2] * c.density();
  EXPECT_LE((mix.density() - expected).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_GT(mix.min_density(), 0.0);
}

TEST(Combine, Errors) {
  const ModelSpace h = ModelSpace::hyperbolic(3);
  const BoundaryMeasure a = uniform_measure(SphereGrid::default_for(3));
  const BoundaryMeasure other = uniform_measure(SphereGrid::make(2, {8, 16}));
  EXPECT_THROW(combine(Eigen::Vector2d(1.0, 1.0).normalized(), {a, other}), ArgumentError);
  EXPECT_THROW(combine(Eigen::Vector2d(0.5, 0.5), {a, a}), ArgumentError);
  EXPECT_THROW(combine(Eigen::Vector2d(-0.6, 0.8), {a, a}), ArgumentError);
  EXPECT_THROW(combine(Eigen::Vector2d(0.6, 0.8), {a}), ArgumentError);
}

TEST(Integrate, BasicValuesAndErrors) {
  const ModelSpace h = ModelSpace::hyperbolic(3);
  const GridPtr g = SphereGrid::default_for(3);
  const BoundaryMeasure u = uniform_measure(g);
  EXPECT_NEAR(integrate([](const BoundaryPoint&) { return 1.0; }, u), 1.0, 1e-12);
  for (int i = 0; i < 3; ++i)
    EXPECT_NEAR(integrate_directions([i](const Eigen::VectorXd& s) { return s[i]; }, u), 0.0, 1e-12);
  EXPECT_NEAR(integrate_directions([](const Eigen::VectorXd& s) { return s[2] * s[2]; }, u), 1.0 / 3.0, 1e-12);
  const BoundaryMeasure nu = visual_measure(h, g, h.exp_map(h.origin(), h.from_components(h.origin(), Eigen::Vector3d(0, 0, 1)), 1.0));
  EXPECT_NEAR(integrate([&](const BoundaryPoint& th) { return busemann(h, h.origin(), th); }, nu), 0.0, 1e-15);
  EXPECT_THROW(integrate_directions([](const Eigen::VectorXd& s) { return s[0] > 0.99 ? std::numeric_limits<double>::infinity() : 0.0; }, u),
               NumericError);
}

TEST(Measures, FullSupport) {
  const ModelSpace h = ModelSpace::hyperbolic(3);
  const GridPtr g = SphereGrid::default_for(3);
  Rng rng(26);
  for (int trial = 0; trial < 5; ++trial) EXPECT_GT(visual_measure(h, g, h.random_point(rng, 3.0)).min_density(), 0.0);
}

}  // namespace
}  // namespace bary
