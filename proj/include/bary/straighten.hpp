#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bary/barycenter.hpp"
#include "bary/boundary.hpp"
#include "bary/models.hpp"
#include "bary/symops.hpp"

namespace bary {

/// Point of the standard spherical k-simplex: a in R^{k+1}, a_i >= 0,
/// sum a_i^2 = 1 (checked to 1e-12).
class SphSimplexPoint {
 public:
  explicit SphSimplexPoint(Eigen::VectorXd a);
  static SphSimplexPoint vertex(int k, int i);
  /// (1, ..., 1) / sqrt(k + 1).
  static SphSimplexPoint barycentric(int k);
  /// Uniform direction in the positive orthant (|gaussian| normalized).
  static SphSimplexPoint random(Rng& rng, int k);

  int k() const { return static_cast<int>(a_.size()) - 1; }
  const Eigen::VectorXd& coords() const { return a_; }
  double operator[](int i) const { return a_[i]; }

 private:
  Eigen::VectorXd a_;
};

/// Ordered vertices x_1 ... x_{k+1} of a singular simplex in a pure H^n.
struct VertexSet {
  ModelSpace space;
  std::vector<Point> points;

  VertexSet(ModelSpace space, std::vector<Point> points);
  int k() const { return static_cast<int>(points.size()) - 1; }
  VertexSet face(const std::vector<int>& indices) const;
};

struct JacobianReport {
  Eigen::VectorXd delta;
  Point imagePoint;
  double jacAbs = 0.0;
  SymOp h = SymOp::zero(1);
  SymOp k = SymOp::zero(1);
  double ratio = 0.0;        // det(H)^{1/2} / det(K)
  double rhs = 0.0;          // 2^n ratio
  double globalBound = 0.0;  // 2^n bcg_bound(n)
  double traceH = 0.0;
  double identityResidual = 0.0;     // max |H + K - I|
  double firstOrderResidual = 0.0;   // |grad B_nu| at the image point
  double minSingularValue = 0.0;     // of the differential
  bool degenerate = false;
};

/// Barycentric straightening of one vertex set. The vertex visual measures
/// are computed once; every evaluation reuses them.
class Straightener {
 public:
  /// Null grid selects SphereGrid::default_for(n).
  Straightener(VertexSet vertices, GridPtr grid = nullptr);

  const VertexSet& vertices() const { return vertices_; }
  const GridPtr& grid() const { return grid_; }

  /// sum a_i^2 nu_{x_i}. Accepts any a with unit norm; signs are ignored,
  /// which extends the map smoothly across the simplex boundary.
  BoundaryMeasure measure(const Eigen::VectorXd& a) const;
  BarycenterResult solve(const Eigen::VectorXd& a, const BarycenterOptions& options = {}) const;

  Point eval(const SphSimplexPoint& delta) const;
  /// Requires k == n. Central differences (step fd_step) along an
  /// orthonormal frame of delta-perp, image differences taken through
  /// log at the image point in its canonical frame.
  JacobianReport jacobian(const SphSimplexPoint& delta, double fd_step = 1e-5) const;

 private:
  VertexSet vertices_;
  GridPtr grid_;
  std::vector<BoundaryMeasure> visual_;
};

/// st_V(delta) = bar(sum a_i^2 nu_{x_i}).
Point st_eval(const VertexSet& v, const SphSimplexPoint& delta, const GridPtr& grid = nullptr);
/// Straightening of the face spanned by `face` (strictly increasing vertex
/// indices) at the restriction of delta. ArgumentError if delta has mass
/// (above 1e-12) off the face.
Point st_face(const VertexSet& v, const std::vector<int>& face, const SphSimplexPoint& delta,
              const GridPtr& grid = nullptr);
JacobianReport jacobian(const VertexSet& v, const SphSimplexPoint& delta, const GridPtr& grid = nullptr);

struct JacScanSample {
  std::uint64_t index = 0;
  std::vector<Point> vertices;
  JacobianReport report;
};

struct JacScanOptions {
  double radius = 2.5;
  GridPtr grid;  // null: default grid
  int histogramBins = 10;
  bool keepSamples = true;
};

struct JacScanSummary {
  int n = 0;
  int samples = 0;
  std::uint64_t seed = 0;
  double radius = 0.0;
  std::string grid;
  double maxJacAbs = 0.0;
  double maxRatio = 0.0;
  double maxTightness = 0.0;  // max jacAbs / rhs
  double maxTraceError = 0.0;
  double maxIdentityResidual = 0.0;
  double maxFirstOrderResidual = 0.0;
  double bound = 0.0;        // bcg_bound(n)
  double globalBound = 0.0;  // 2^n bcg_bound(n)
  int degenerate = 0;
  /// Counts of jacAbs / rhs over equal bins of [0, 1].
  std::vector<int> histogram;
  std::vector<JacScanSample> records;
};

/// Seeded scan over random simplices (vertices uniform-radius in a ball
/// around O) and random interior points. n in {3, 4}, samples >= 10.
/// Throws PropertyFailure carrying the serialized sample when
/// jacAbs > rhs (1 + 1e-3), rhs > globalBound (1 + 1e-9), |tr H - 1| or
/// |H + K - I| exceed 1e-8.
JacScanSummary jac_scan(int n, int samples, std::uint64_t seed, const JacScanOptions& options = {});

}  // namespace bary
