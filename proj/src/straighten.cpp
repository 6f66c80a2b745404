#include "bary/straighten.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bary/errors.hpp"
#include "bary/parallel.hpp"
#include "bary/serialize.hpp"

namespace bary {

SphSimplexPoint::SphSimplexPoint(Eigen::VectorXd a) : a_(std::move(a)) {
  if (a_.size() < 1) throw ArgumentError("SphSimplexPoint: empty coordinate vector");
  if (!a_.allFinite() || (a_.array() < 0.0).any())
    throw ArgumentError("SphSimplexPoint: coordinates must be finite and nonnegative");
  if (std::abs(a_.squaredNorm() - 1.0) > 1e-12) throw ArgumentError("SphSimplexPoint: sum of squares must be 1");
}

SphSimplexPoint SphSimplexPoint::vertex(int k, int i) {
  if (k < 0 || i < 0 || i > k) throw ArgumentError("SphSimplexPoint::vertex: index out of range");
  return SphSimplexPoint(Eigen::VectorXd::Unit(k + 1, i));
}

SphSimplexPoint SphSimplexPoint::barycentric(int k) {
  if (k < 0) throw ArgumentError("SphSimplexPoint::barycentric: k must be >= 0");
  return SphSimplexPoint(Eigen::VectorXd::Constant(k + 1, 1.0 / std::sqrt(k + 1.0)));
}

SphSimplexPoint SphSimplexPoint::random(Rng& rng, int k) {
  Eigen::VectorXd a = gaussian_vector(rng, k + 1).cwiseAbs();
  return SphSimplexPoint(a / a.norm());
}

VertexSet::VertexSet(ModelSpace space_, std::vector<Point> points_)
    : space(std::move(space_)), points(std::move(points_)) {
  if (!space.is_pure_hyperbolic())
    throw UnsupportedSpaceError("straightening is only implemented on pure H^n (got " + space.name() + ")");
  if (points.empty()) throw ArgumentError("VertexSet: at least one vertex required");
  for (const Point& p : points)
    if (p.coords.size() != space.ambient_dim() || space.point_residual(p) > 1e-8)
      throw ArgumentError("VertexSet: vertex is not a point of " + space.name());
}

VertexSet VertexSet::face(const std::vector<int>& indices) const {
  if (indices.empty()) throw ArgumentError("face: empty index set");
  std::vector<Point> sub;
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] < 0 || indices[j] > k() || (j > 0 && indices[j] <= indices[j - 1]))
      throw ArgumentError("face: indices must be strictly increasing vertex indices");
    sub.push_back(points[indices[j]]);
  }
  return VertexSet(space, std::move(sub));
}

Straightener::Straightener(VertexSet vertices, GridPtr grid) : vertices_(std::move(vertices)), grid_(std::move(grid)) {
  if (!grid_) grid_ = SphereGrid::default_for(vertices_.space.dim());
  visual_.reserve(vertices_.points.size());
  for (const Point& p : vertices_.points) visual_.push_back(visual_measure(vertices_.space, grid_, p));
}

BoundaryMeasure Straightener::measure(const Eigen::VectorXd& a) const {
  if (a.size() != static_cast<Eigen::Index>(visual_.size())) throw ArgumentError("one coefficient per vertex required");
  return combine(a.cwiseAbs(), visual_);
}

BarycenterResult Straightener::solve(const Eigen::VectorXd& a, const BarycenterOptions& options) const {
  return bar(vertices_.space, measure(a), options);
}

Point Straightener::eval(const SphSimplexPoint& delta) const { return solve(delta.coords()).point; }

JacobianReport Straightener::jacobian(const SphSimplexPoint& delta, double fd_step) const {
  const ModelSpace& space = vertices_.space;
  const int n = space.dim();
  if (delta.k() != vertices_.k() || vertices_.k() != n)
    throw ArgumentError("jacobian: needs n + 1 vertices in H^n and a matching simplex point");
  if (!(fd_step > 0.0)) throw ArgumentError("jacobian: fd_step must be positive");

  BarycenterOptions tight;
  tight.gradTol = 1e-12;
  const BarycenterResult center = solve(delta.coords(), tight);
  const Point& y = center.point;
  const BnuLocal local = bnu_local(space, y, measure(delta.coords()));

  JacobianReport r;
  r.delta = delta.coords();
  r.imagePoint = y;
  r.h = SymOp(local.h);
  r.k = SymOp(local.k);
  r.ratio = det_ratio(r.h, r.k);
  r.rhs = std::pow(2.0, n) * r.ratio;
  r.globalBound = std::pow(2.0, n) * bcg_bound(n);
  r.traceH = local.h.trace();
  r.identityResidual = (local.h + local.k - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  r.firstOrderResidual = local.gradient.norm();

  // Orthonormal frame of the tangent space of the sphere at delta.
  const Eigen::MatrixXd dmat = delta.coords();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(dmat);
  const Eigen::MatrixXd basis = Eigen::MatrixXd(qr.householderQ()).rightCols(n);

  Eigen::MatrixXd diff(n, n);
  tight.initial = y;
  try {
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd plus = delta.coords() + fd_step * basis.col(j);
      Eigen::VectorXd minus = delta.coords() - fd_step * basis.col(j);
      const Point yp = solve(plus / plus.norm(), tight).point;
      const Point ym = solve(minus / minus.norm(), tight).point;
      diff.col(j) = (space.components(space.log_map(y, yp)) - space.components(space.log_map(y, ym))) /
                    (2.0 * fd_step);
    }
  } catch (const ConvergenceError&) {
    r.degenerate = true;
    r.jacAbs = std::numeric_limits<double>::quiet_NaN();
    return r;
  } catch (const ConditioningError&) {
    r.degenerate = true;
    r.jacAbs = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.jacAbs = std::abs(diff.determinant());
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(diff);
  const Eigen::VectorXd& sv = svd.singularValues();
  r.minSingularValue = sv[n - 1];
  r.degenerate = !(sv[n - 1] > 1e-6 * std::max(sv[0], 1e-3));
  return r;
}

Point st_eval(const VertexSet& v, const SphSimplexPoint& delta, const GridPtr& grid) {
  if (delta.k() != v.k()) throw ArgumentError("st_eval: simplex point and vertex set disagree on k");
  return Straightener(v, grid).eval(delta);
}

Point st_face(const VertexSet& v, const std::vector<int>& face, const SphSimplexPoint& delta, const GridPtr& grid) {
  if (delta.k() != v.k()) throw ArgumentError("st_face: simplex point and vertex set disagree on k");
  const VertexSet sub = v.face(face);
  Eigen::VectorXd restricted(static_cast<Eigen::Index>(face.size()));
  double off_face = 0.0;
  for (int i = 0, j = 0; i <= v.k(); ++i) {
    if (j < static_cast<int>(face.size()) && face[j] == i)
      restricted[j++] = delta[i];
    else
      off_face += delta[i] * delta[i];
  }
  if (off_face > 1e-12) throw ArgumentError("st_face: simplex point is not supported on the face");
  return Straightener(sub, grid).eval(SphSimplexPoint(restricted / restricted.norm()));
}

JacobianReport jacobian(const VertexSet& v, const SphSimplexPoint& delta, const GridPtr& grid) {
  return Straightener(v, grid).jacobian(delta);
}

JacScanSummary jac_scan(int n, int samples, std::uint64_t seed, const JacScanOptions& options) {
  if (n != 3 && n != 4) throw ArgumentError("jac_scan: n must be 3 or 4");
  if (samples < 10) throw ArgumentError("jac_scan: at least 10 samples required");
  if (!(options.radius >= 0.0)) throw ArgumentError("jac_scan: radius must be nonnegative");
  if (options.histogramBins < 1) throw ArgumentError("jac_scan: histogramBins must be >= 1");
  const ModelSpace space = ModelSpace::hyperbolic(n);
  const GridPtr grid = options.grid ? options.grid : SphereGrid::default_for(n);
  if (grid->hyperbolic_dim() != n) throw ArgumentError("jac_scan: grid does not match H^n");

  std::vector<JacScanSample> records(static_cast<std::size_t>(samples));
  parallel_for(records.size(), [&](std::size_t i) {
    Rng rng = sample_rng(seed, i);
    std::vector<Point> vertices;
    for (int j = 0; j <= n; ++j) vertices.push_back(space.random_point(rng, options.radius));
    const SphSimplexPoint delta = SphSimplexPoint::random(rng, n);
    records[i].index = i;
    records[i].vertices = vertices;
    records[i].report = Straightener(VertexSet(space, vertices), grid).jacobian(delta);
  });

  JacScanSummary s;
  s.n = n;
  s.samples = samples;
  s.seed = seed;
  s.radius = options.radius;
  s.grid = grid->spec();
  s.bound = bcg_bound(n);
  s.globalBound = std::pow(2.0, n) * s.bound;
  s.histogram.assign(static_cast<std::size_t>(options.histogramBins), 0);
  for (const JacScanSample& rec : records) {
    const JacobianReport& r = rec.report;
    const double trace_error = std::abs(r.traceH - 1.0);
    std::string violation;
    if (!(r.jacAbs <= r.rhs * (1.0 + 1e-3)) && !(r.degenerate && std::isnan(r.jacAbs)))
      violation = "jacobian exceeds 2^n det(H)^{1/2}/det(K)";
    else if (!(r.rhs <= r.globalBound * (1.0 + 1e-9)))
      violation = "determinant ratio exceeds the global bound";
    else if (!(trace_error <= 1e-8))
      violation = "tr H differs from 1";
    else if (!(r.identityResidual <= 1e-8))
      violation = "H + K differs from the identity";
    else if (!(r.firstOrderResidual <= 1e-9))
      violation = "image point violates the first-order condition";
    if (!violation.empty()) {
      Json sample = to_json(rec);
      sample["n"] = n;
      sample["seed"] = seed;
      sample["radius"] = options.radius;
      sample["grid"] = grid->spec();
      throw PropertyFailure("jac_scan sample " + std::to_string(rec.index) + ": " + violation, dump_json(sample));
    }
    if (r.degenerate) ++s.degenerate;
    if (std::isfinite(r.jacAbs)) {
      s.maxJacAbs = std::max(s.maxJacAbs, r.jacAbs);
      const double tight = r.rhs > 0.0 ? r.jacAbs / r.rhs : 0.0;
      s.maxTightness = std::max(s.maxTightness, tight);
      const int bin = std::clamp(static_cast<int>(tight * options.histogramBins), 0, options.histogramBins - 1);
      ++s.histogram[static_cast<std::size_t>(bin)];
    }
    s.maxRatio = std::max(s.maxRatio, r.ratio);
    s.maxTraceError = std::max(s.maxTraceError, trace_error);
    s.maxIdentityResidual = std::max(s.maxIdentityResidual, r.identityResidual);
    s.maxFirstOrderResidual = std::max(s.maxFirstOrderResidual, r.firstOrderResidual);
  }
  if (options.keepSamples) s.records = std::move(records);
  return s;
}

}  // namespace bary
