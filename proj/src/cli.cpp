#include "bary/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <regex>

#include "CLI11.hpp"

#include "bary/barycenter.hpp"
#include "bary/boundary.hpp"
#include "bary/busemann.hpp"
#include "bary/errors.hpp"
#include "bary/oracles.hpp"
#include "bary/serialize.hpp"
#include "bary/straighten.hpp"
#include "bary/symops.hpp"
#include "bary/volbounds.hpp"

namespace bary {

namespace {

int pick(int value, int fallback) { return value >= 0 ? value : fallback; }
double pick(double value, double fallback) { return value >= 0.0 ? value : fallback; }
double tol_or(const RunConfig& c, double fallback) { return c.tol ? *c.tol : fallback; }

// Tracks the worst value of a checked quantity and the first sample that
// violates its threshold.
struct Check {
  Check(std::string name_, double limit_) : name(std::move(name_)), limit(limit_) {}

  std::string name;
  double limit;
  double worst = 0.0;
  std::optional<Json> failure;

  void observe(double value, const std::function<Json()>& sample) {
    worst = std::max(worst, std::isnan(value) ? std::numeric_limits<double>::infinity() : value);
    if (!(value <= limit) && !failure) {
      Json s = sample();
      s["check"] = name;
      s["value"] = value;
      s["limit"] = limit;
      failure = s;
    }
  }
};

struct Report {
  Json body = Json::object();
  std::vector<Check*> checks;

  Json finish(const RunConfig& c) {
    Json out = body;
    out["subcommand"] = c.subcommand;
    Json checks_json = Json::object();
    bool ok = true;
    for (Check* ch : checks) {
      checks_json[ch->name] = Json{{"worst", ch->worst}, {"limit", ch->limit}, {"pass", !ch->failure}};
      if (ch->failure) {
        ok = false;
        if (!out.contains("failure")) out["failure"] = *ch->failure;
      }
    }
    if (!checks.empty()) out["checks"] = checks_json;
    out["status"] = ok ? "pass" : "fail";
    return out;
  }
};

GridPtr grid_for(const RunConfig& c, const ModelSpace& space) {
  if (!space.is_pure_hyperbolic()) throw UnsupportedSpaceError("subcommand needs a pure H^n space");
  return c.grid.empty() ? SphereGrid::default_for(space.dim()) : SphereGrid::parse(c.grid, space.dim() - 1);
}

// Default sampling radius for checks held to 1e-8. The default S^3 grid
// resolves visual measures to that accuracy only out to distance ~1.5.
double accurate_radius(const RunConfig& c, const ModelSpace& space, double nominal) {
  if (c.radius >= 0.0) return c.radius;
  return c.grid.empty() && space.dim() >= 4 ? std::min(nominal, 1.5) : nominal;
}

// ---------------------------------------------------------------- tr-k

Json run_tr_k(const RunConfig& c) {
  const int n_max = pick(c.n, 10);
  const int count = pick(c.samples, 1000);
  if (n_max < 1 || count < 1 || c.bruteSamples < 1) throw ArgumentError("tr-k: n, samples, brute-samples must be >= 1");
  Check eig{"eigenvalueSumError", tol_or(c, 1e-10)};
  Check brute{"bruteForceViolation", 1e-10};
  Check refined{"refinedGap", 1e-6};
  for (int i = 0; i < count; ++i) {
    Rng rng = sample_rng(c.seed, static_cast<std::uint64_t>(i));
    const int d = c.n >= 0 ? c.n : std::uniform_int_distribution<int>(1, n_max)(rng);
    const int k = c.k >= 0 ? c.k : std::uniform_int_distribution<int>(1, d)(rng);
    if (k < 1 || k > d) throw ArgumentError("tr-k: need 1 <= k <= n");
    const bool psd = i % 2 == 0;
    const int rank = std::uniform_int_distribution<int>(1, d)(rng);
    const Eigen::MatrixXd g = gaussian_matrix(rng, d, rank);
    const Eigen::MatrixXd a = (psd ? 1.0 : -1.0) * g * g.transpose() / rank;
    const double tk = trace_k(SymOp(a), k);
    // Singular values of a semidefinite matrix are |eigenvalues|.
    Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues();
    std::sort(sv.data(), sv.data() + sv.size());
    const double reference = (psd ? 1.0 : -1.0) * sv.head(k).sum();
    const oracle::KyFanResult kf = oracle::ky_fan_brute(a, k, psd, c.bruteSamples, rng);
    auto sample = [&] { return Json{{"index", i}, {"matrix", to_json(a)}, {"k", k}, {"traceK", tk}}; };
    eig.observe(std::abs(tk - reference), sample);
    brute.observe(psd ? tk - kf.sampled : kf.sampled - tk, sample);
    refined.observe(std::abs(kf.refined - tk), sample);
  }
  Report r;
  r.body = Json{{"matrices", count}, {"maxDim", n_max}, {"bruteSamples", c.bruteSamples}, {"seed", c.seed}};
  r.checks = {&eig, &brute, &refined};
  return r.finish(c);
}

// ---------------------------------------------------------------- bcg

Json run_bcg_fuzz(const RunConfig& c) {
  const int n = pick(c.n, 3);
  const int count = pick(c.samples, 10000);
  Report r;
  if (n == 2) {
    Json family = Json::array();
    double max_ratio = 0.0;
    for (double eps = 1e-1; eps >= 1e-9; eps /= 10.0) {
      const double ratio = bcg_two_dim_ratio(eps);
      max_ratio = std::max(max_ratio, ratio);
      family.push_back(Json{{"eps", eps}, {"ratio", ratio}});
    }
    r.body = Json{{"n", 2}, {"family", family}, {"maxRatio", max_ratio}, {"unbounded", max_ratio > 1e3}};
    Json out = r.finish(c);
    if (!(max_ratio > 1e3)) {
      out["status"] = "fail";
      out["failure"] = Json{{"check", "unboundedFamily"}, {"value", max_ratio}};
    }
    return out;
  }
  try {
    const BcgFuzzSummary s = bcg_fuzz(n, count, c.seed);
    r.body = Json{{"n", s.n},           {"samples", s.samples}, {"seed", s.seed},
                  {"maxRatio", s.maxRatio}, {"bound", s.bound},     {"maxTightness", s.maxTightness}};
  } catch (const PropertyFailure& e) {
    r.body = Json{{"n", n}, {"samples", count}, {"seed", c.seed}};
    Json out = r.finish(c);
    out["status"] = "fail";
    out["failure"] = Json{{"message", e.what()}, {"sample", Json::parse(e.sample())}};
    return out;
  }
  return r.finish(c);
}

Json run_bcg_extremize(const RunConfig& c) {
  const int n = pick(c.n, 3);
  const BcgExtremum e = bcg_extremize(n, c.seed);
  const double bound = bcg_bound(n);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  Check gap{"relativeGap", tol_or(c, 1e-6)};
  Check hdist{"distanceToExtremizer", 1e-6};
  auto sample = [&] { return Json{{"H", to_json(e.h)}, {"K", to_json(e.k)}, {"ratio", e.ratio}}; };
  gap.observe(std::abs(e.ratio / bound - 1.0), sample);
  hdist.observe(std::max((e.h.matrix() - id / n).cwiseAbs().maxCoeff(),
                         (e.k.matrix() - (n - 1.0) / n * id).cwiseAbs().maxCoeff()),
                sample);
  Report r;
  r.body = Json{{"n", n},           {"seed", c.seed},         {"ratio", e.ratio},
                {"bound", bound},   {"iterations", e.iterations}, {"H", to_json(e.h)},
                {"K", to_json(e.k)}};
  r.checks = {&gap, &hdist};
  return r.finish(c);
}

// ---------------------------------------------------------------- busemann

Json run_busemann_check(const RunConfig& c) {
  const ModelSpace space = parse_space(c.space);
  const int count = pick(c.samples, 100);
  const double radius = pick(c.radius, 2.0);
  Check limit{"limitOracleError", tol_or(c, 1e-8)};
  Check grad{"gradientFdError", 1e-6};
  Check hess{"hessianFdError", 1e-4};
  Check ident{"identityError", 1e-8};
  for (int i = 0; i < count; ++i) {
    Rng rng = sample_rng(c.seed, static_cast<std::uint64_t>(i));
    const Point x = space.random_point(rng, radius);
    const BoundaryPoint th = random_boundary_point(space, rng);
    auto f = [&](const Point& p) { return busemann(space, p, th); };
    auto sample = [&] {
      return Json{{"index", i}, {"x", to_json(x)}, {"theta", to_json(th.coords)}, {"weights", to_json(th.weights)}};
    };
    const BusemannEval ev = evaluate_busemann(space, x, th);
    limit.observe(std::abs(ev.value - oracle::busemann_limit(space, x, th)), sample);
    const Eigen::VectorXd gc = space.components(ev.gradient);
    grad.observe((gc - oracle::fd_gradient(space, x, f)).cwiseAbs().maxCoeff(), sample);
    hess.observe((ev.hessian.matrix() - oracle::fd_hessian(space, x, f)).cwiseAbs().maxCoeff(), sample);
    if (space.is_pure_hyperbolic())
      ident.observe((gc * gc.transpose() + ev.hessian.matrix() - Eigen::MatrixXd::Identity(space.dim(), space.dim()))
                        .cwiseAbs()
                        .maxCoeff(),
                    sample);
  }
  Report r;
  r.body = Json{{"space", space.name()}, {"samples", count}, {"seed", c.seed}, {"radius", radius}};
  r.checks = {&limit, &grad, &hess};
  if (space.is_pure_hyperbolic()) r.checks.push_back(&ident);
  return r.finish(c);
}

Json run_rank_scan(const RunConfig& c) {
  const ModelSpace space = parse_space(c.space);
  const int count = pick(c.samples, 200);
  const double radius = pick(c.radius, 2.0);
  const int n = space.dim();
  Check equiv{"tr2RankMismatch", 0.0};
  Check oracle_rank{"rankOracleMismatch", 0.0};
  Check ric{"ricciKError", tol_or(c, 1e-10)};
  double u_min = std::numeric_limits<double>::infinity(), u_max = -u_min;
  const int u_points = std::min(count, 5);
  for (int i = 0; i < count; ++i) {
    Rng rng = sample_rng(c.seed, static_cast<std::uint64_t>(i));
    const Point x = space.random_point(rng, radius);
    const BoundaryPoint th = random_boundary_point(space, rng);
    auto sample = [&] {
      return Json{{"index", i}, {"x", to_json(x)}, {"theta", to_json(th.coords)}, {"weights", to_json(th.weights)}};
    };
    equiv.observe(tr2_rank_equivalence(space, x, th) ? 0.0 : 1.0, sample);
    const int rp = rank_plus(space, x, th);
    const int parallel = oracle::parallel_jacobi_count(space, direction_to(space, x, th));
    oracle_rank.observe(std::abs(rp - (parallel + 1)), sample);
    if (space.is_pure_hyperbolic()) {
      const Tangent v = space.random_unit_tangent(rng, x);
      for (int k = 1; k <= n; ++k) ric.observe(std::abs(ric_k(space, v, k) + (k - 1.0)), sample);
    }
    if (i < u_points) {
      const double u = u_of_x(space, x, UOfXOptions{512, 3, c.seed + static_cast<std::uint64_t>(i)});
      u_min = std::min(u_min, u);
      u_max = std::max(u_max, u);
    }
  }
  Report r;
  r.body = Json{{"space", space.name()}, {"samples", count}, {"seed", c.seed}, {"uMin", u_min}, {"uMax", u_max}};
  r.checks = {&equiv, &oracle_rank};
  if (space.is_pure_hyperbolic()) r.checks.push_back(&ric);
  return r.finish(c);
}

// Exponents along v predicted factor by factor: a hyperbolic factor crossed at
// speed a contributes dim - 1 exponents equal to a; every other direction
// perpendicular to v lies in a flat and has exponent 0.
Eigen::VectorXd factorwise_exponents(const ModelSpace& space, const Eigen::VectorXd& vc) {
  std::vector<double> e;
  for (std::size_t i = 0; i < space.factors().size(); ++i) {
    const Factor& f = space.factors()[i];
    const double a = vc.segment(space.factor_tangent_offset(static_cast<int>(i)), f.dim).norm();
    if (f.kind == FactorKind::Hyperbolic && a > 0.0)
      for (int j = 0; j + 1 < f.dim; ++j) e.push_back(a);
  }
  while (static_cast<int>(e.size()) < space.dim() - 1) e.push_back(0.0);
  std::sort(e.begin(), e.end());
  return Eigen::Map<const Eigen::VectorXd>(e.data(), static_cast<Eigen::Index>(e.size()));
}

Json run_lyapunov(const RunConfig& c) {
  const ModelSpace space = parse_space(c.space);
  if (space.variant() == ModelSpace::Variant::FlatTorus)
    throw UnsupportedSpaceError("lyapunov: flat tori are only used by the Bochner check");
  const int count = pick(c.samples, 5);
  const double radius = pick(c.radius, 1.0);
  Check hyp{"hyperbolicExponentError", tol_or(c, 1e-2)};
  Check curved{"factorwiseExponentError", tol_or(c, 1e-2)};
  Check flat{"flatExponentError", 1e-3};
  Json rows = Json::array();
  auto add = [&](int i, const Point& x, const Tangent& v) {
    const LyapunovEstimate est = lyapunov_lower(space, v, c.horizon);
    const Eigen::VectorXd vc = space.components(v);
    const Eigen::VectorXd expect = factorwise_exponents(space, vc);
    rows.push_back(Json{{"index", i},
                        {"lower", est.lower},
                        {"exponents", to_json(est.exponents)},
                        {"expected", to_json(expect)},
                        {"direction", to_json(vc)}});
    auto sample = [&] { return Json{{"index", i}, {"x", to_json(x)}, {"direction", to_json(vc)}}; };
    if (space.is_pure_hyperbolic()) hyp.observe(std::abs(est.lower - 1.0), sample);
    for (Eigen::Index j = 0; j < expect.size(); ++j)
      (expect[j] == 0.0 ? flat : curved).observe(std::abs(est.exponents[j] - expect[j]), sample);
  };
  for (int i = 0; i < count; ++i) {
    Rng rng = sample_rng(c.seed, static_cast<std::uint64_t>(i));
    const Point x = space.random_point(rng, radius);
    add(i, x, space.random_unit_tangent(rng, x));
  }
  // One direction inside each factor, which is flat for Euclidean factors
  // and leaves the other factors' directions parallel.
  if (!space.is_pure_hyperbolic()) {
    const Point o = space.origin();
    for (std::size_t f = 0; f < space.factors().size(); ++f) {
      Eigen::VectorXd vc = Eigen::VectorXd::Zero(space.dim());
      vc[space.factor_tangent_offset(static_cast<int>(f))] = 1.0;
      add(count + static_cast<int>(f), o, space.from_components(o, vc));
    }
  }
  Report r;
  r.body = Json{{"space", space.name()}, {"samples", count}, {"seed", c.seed}, {"T", c.horizon}, {"rows", rows}};
  r.checks = {&curved, &flat};
  if (space.is_pure_hyperbolic()) r.checks.insert(r.checks.begin(), &hyp);
  return r.finish(c);
}

// ---------------------------------------------------------------- barycenter

// Distance from y to the geodesic line through p and q in the hyperboloid.
double distance_to_line(const Point& p, const Point& q, const Point& y) {
  Eigen::Matrix2d gram;
  gram << minkowski(p.coords, p.coords), minkowski(p.coords, q.coords), minkowski(q.coords, p.coords),
      minkowski(q.coords, q.coords);
  const Eigen::Vector2d rhs(minkowski(y.coords, p.coords), minkowski(y.coords, q.coords));
  const Eigen::Vector2d coef = gram.partialPivLu().solve(rhs);
  const Eigen::VectorXd w = y.coords - coef[0] * p.coords - coef[1] * q.coords;
  return std::asinh(std::sqrt(std::max(0.0, minkowski(w, w))));
}

Json run_barycenter(const RunConfig& c) {
  const ModelSpace space = parse_space(c.space);
  const GridPtr grid = grid_for(c, space);
  const int count = pick(c.samples, 20);
  const double radius = accurate_radius(c, space, 3.0);
  Check at_origin{"originError", 1e-9};
  Check recover{"visualRecoveryError", tol_or(c, 1e-8)};
  Check equi{"equivarianceError", 1e-6};
  Check base{"basepointDeviation", 1e-8};
  Check line{"geodesicDeviation", 1e-6};
  Check iters{"newtonIterations", 15};
  Check pd{"hessianMinEigenvalue", 0.0};  // observed as -min eig

  double min_eig = std::numeric_limits<double>::infinity();
  const BarycenterResult o = bar(space, uniform_measure(grid));
  at_origin.observe(space.dist(o.point, space.origin()), [] { return Json::object(); });
  for (int i = 0; i < count; ++i) {
    Rng rng = sample_rng(c.seed, static_cast<std::uint64_t>(i));
    const Point x = space.random_point(rng, radius);
    const BarycenterResult res = bar(space, visual_measure(space, grid, x));
    auto sx = [&] { return Json{{"index", i}, {"x", to_json(x)}}; };
    recover.observe(space.dist(res.point, x), sx);
    iters.observe(res.iterations, sx);
    pd.observe(-res.minIterateHessEig, sx);
    min_eig = std::min(min_eig, res.minIterateHessEig);

    // Equivariance on a three-vertex combination.
    std::vector<Point> pts, moved;
    const Isometry g = space.random_isometry(rng, 1.0);
    for (int j = 0; j < 3; ++j) {
      pts.push_back(space.random_point(rng, 0.5 * radius));
      moved.push_back(space.apply(g, pts.back()));
    }
    const SphSimplexPoint a = SphSimplexPoint::random(rng, 2);
    const Point y = Straightener(VertexSet(space, pts), grid).eval(a);
    const Point gy = Straightener(VertexSet(space, moved), grid).eval(a);
    equi.observe(space.dist(space.apply(g, y), gy), sx);

    // Basepoint shift changes B_nu by a constant.
    const BoundaryMeasure nu = Straightener(VertexSet(space, pts), grid).measure(a.coords());
    const Point p = space.random_point(rng, radius);
    double first = 0.0, dev = 0.0;
    for (int j = 0; j < 5; ++j) {
      const Point z = space.random_point(rng, radius);
      const double d = bnu_value(space, z, nu, p) - bnu_value(space, z, nu);
      if (j == 0) first = d;
      dev = std::max(dev, std::abs(d - first));
    }
    base.observe(dev, sx);

    // Two-point combination stays on the geodesic through the centers.
    const double t = uniform01(rng);
    const Eigen::Vector2d w(std::sqrt(t), std::sqrt(1.0 - t));
    const Point yl = Straightener(VertexSet(space, {pts[0], pts[1]}), grid).eval(SphSimplexPoint(w));
    line.observe(distance_to_line(pts[0], pts[1], yl), sx);
  }
  Report r;
  r.body = Json{{"space", space.name()}, {"grid", grid->spec()}, {"samples", count}, {"seed", c.seed},
                {"radius", radius}, {"minIterateHessEig", min_eig}};
  r.checks = {&at_origin, &recover, &equi, &base, &line, &iters, &pd};
  return r.finish(c);
}

Json run_straighten(const RunConfig& c) {
  const ModelSpace space = parse_space(c.space);
  const GridPtr grid = grid_for(c, space);
  const int count = pick(c.samples, 10);
  const double radius = accurate_radius(c, space, 2.5);
  const int n = space.dim();
  Check vert{"vertexInterpolationError", tol_or(c, 1e-8)};
  Check face{"faceCompatibilityError", 1e-8};
  Check first{"firstOrderResidual", 1e-9};
  for (int i = 0; i < count; ++i) {
    Rng rng = sample_rng(c.seed, static_cast<std::uint64_t>(i));
    std::vector<Point> pts;
    for (int j = 0; j <= n; ++j) pts.push_back(space.random_point(rng, radius));
    const VertexSet v(space, pts);
    const Straightener st(v, grid);
    Json verts = Json::array();
    for (const Point& p : pts) verts.push_back(to_json(p));
    auto sample = [&] { return Json{{"index", i}, {"vertices", verts}}; };
    for (int j = 0; j <= n; ++j) vert.observe(space.dist(st.eval(SphSimplexPoint::vertex(n, j)), pts[j]), sample);
    // A random proper face and a point on it.
    std::vector<int> idx;
    while (idx.size() < 2) {
      idx.clear();
      for (int j = 0; j <= n; ++j)
        if (uniform01(rng) < 0.5) idx.push_back(j);
      if (static_cast<int>(idx.size()) == n + 1) idx.pop_back();
    }
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n + 1);
    for (int j : idx) a[j] = std::abs(gaussian_vector(rng, 1)[0]) + 1e-3;
    const SphSimplexPoint delta(a / a.norm());
    face.observe(space.dist(st.eval(delta), st_face(v, idx, delta, grid)), sample);
    const SphSimplexPoint inner = SphSimplexPoint::random(rng, n);
    BarycenterOptions tight;
    tight.gradTol = 1e-12;
    first.observe(st.solve(inner.coords(), tight).gradNorm, sample);
  }
  Report r;
  r.body = Json{{"space", space.name()}, {"grid", grid->spec()}, {"samples", count}, {"seed", c.seed},
                {"radius", radius}};
  r.checks = {&vert, &face, &first};
  return r.finish(c);
}

Json run_jac_scan(const RunConfig& c) {
  const ModelSpace space = parse_space(c.space);
  const GridPtr grid = grid_for(c, space);
  JacScanOptions opt;
  opt.radius = pick(c.radius, 2.5);
  opt.grid = grid;
  opt.keepSamples = c.records;
  const int count = pick(c.samples, 200);
  try {
    const JacScanSummary s = jac_scan(space.dim(), count, c.seed, opt);
    Json out = to_json(s, c.records);
    out["subcommand"] = c.subcommand;
    out["status"] = "pass";
    return out;
  } catch (const PropertyFailure& e) {
    return Json{{"subcommand", c.subcommand},
                {"status", "fail"},
                {"failure", Json{{"message", e.what()}, {"sample", Json::parse(e.sample())}}}};
  }
}

// ---------------------------------------------------------------- volbounds

Json run_bounds(const RunConfig& c) {
  const int n = pick(c.n, 3);
  double integral;
  double u = std::numeric_limits<double>::quiet_NaN();
  if (c.uIntegral) {
    integral = *c.uIntegral;
  } else {
    if (!(c.volume >= 0.0)) throw ArgumentError("bounds: volume must be nonnegative");
    const ModelSpace h = ModelSpace::hyperbolic(n);
    u = u_of_x(h, h.origin());
    integral = c.volume * std::pow(u, n);
  }
  const BoundReport b = simplicial_lower_bound(n, integral);
  const double via_straightening = straightening_bound(integral, std::ldexp(bcg_bound(n), n), n);
  Check pipeline{"pipelineRelativeError", 1e-12};
  Check omega{"sphereVolumeQuadratureError", 1e-8};
  Check simplex{"simplexVolumeQuadratureError", 1e-8};
  auto none = [] { return Json::object(); };
  pipeline.observe(std::abs(via_straightening - b.lowerBound) / std::max(1.0, std::abs(b.lowerBound)), none);
  omega.observe(std::abs(sphere_volume(n) - oracle::shell_sphere_volume(n)), none);
  simplex.observe(std::abs(simplex_volume(n) - oracle::orthant_volume(n)), none);
  Report r;
  r.body = to_json(b);
  r.body["straighteningBound"] = via_straightening;
  r.body["simplexVolume"] = simplex_volume(n);
  r.body["sigmaUpper"] = sigma_upper(n);
  if (!c.uIntegral) {
    r.body["u"] = u;
    r.body["volume"] = c.volume;
  }
  r.checks = {&pipeline, &omega, &simplex};
  return r.finish(c);
}

Json run_sigma_compare(const RunConfig& c) {
  Json rows = Json::array();
  bool ok = true;
  for (const SigmaRow& row : sigma_compare(c.from, c.to)) {
    rows.push_back(to_json(row));
    ok = ok && row.inferior;
  }
  Json out{{"subcommand", c.subcommand}, {"from", c.from}, {"to", c.to}, {"rows", rows}};
  out["status"] = ok ? "pass" : "fail";
  return out;
}

Json run_bochner(const RunConfig& c) {
  const std::vector<std::string> all{"flat", "mixed", "conformal"};
  std::vector<std::string> fields;
  if (c.field == "all")
    fields = all;
  else if (std::find(all.begin(), all.end(), c.field) != all.end())
    fields = {c.field};
  else
    throw ArgumentError("bochner: --field must be flat, mixed, conformal or all");
  Check flat{"flatResidual", tol_or(c, 1e-10)};
  Check conf{"conformalResidual", 1e-6};
  Json rows = Json::array();
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const std::string& f = fields[i];
    Rng rng = sample_rng(c.seed, i);
    TorusField field;
    if (f == "flat")
      field = TorusField::gradient_of(ScalarMode{{1, 0}, 0.0, 1.0});
    else if (f == "mixed")
      field = TorusField::random(rng, 3, 4);
    else
      field = TorusField::random(rng, 2, 3, 0.1);
    Json refinement = Json::array();
    for (int res = 16; res < c.gridRes; res *= 2)
      if (res > 2 * field.bandwidth()) refinement.push_back(Json{{"gridRes", res}, {"residual", bochner_check(field, res).residual}});
    const BochnerResult b = bochner_check(field, c.gridRes);
    Json row = to_json(b);
    row["field"] = f;
    row["refinement"] = refinement;
    rows.push_back(row);
    (f == "conformal" ? conf : flat).observe(b.residual, [&] { return Json{{"field", f}}; });
  }
  // Refinement study on a strongly curved conformal torus, where the
  // residual is visibly above roundoff on coarse grids.
  Check decay{"refinementDecay", 1e-10};
  Check rate{"refinementRatio", 0.1};  // residual ratio per +4 nodes above the roundoff floor
  Json study = Json::array();
  {
    Rng rng = sample_rng(c.seed, fields.size());
    const TorusField field = TorusField::random(rng, 6, 6, 2.5);
    double coarse = 0.0, fine = 0.0, prev = -1.0;
    for (int res = 16; res <= std::max(64, c.gridRes); res += 4) {
      const BochnerResult b = bochner_check(field, res);
      const double scale = std::max({std::abs(b.divergenceSq), std::abs(b.traceNablaSq), 1.0});
      const double rel = b.residual / scale;
      study.push_back(Json{{"gridRes", res}, {"residual", b.residual}, {"relativeResidual", rel}});
      if (res == 16) coarse = rel;
      if (prev > 1e-12) rate.observe(rel / prev, [&] { return Json{{"gridRes", res}, {"previous", prev}}; });
      prev = rel;
      fine = rel;
    }
    decay.observe(fine, [&] { return Json{{"coarse", coarse}}; });
  }
  Report r;
  r.body = Json{{"seed", c.seed}, {"rows", rows}, {"refinementStudy", study}};
  r.checks = {&flat, &conf, &decay, &rate};
  return r.finish(c);
}

const std::map<std::string, std::function<Json(const RunConfig&)>>& dispatch() {
  static const std::map<std::string, std::function<Json(const RunConfig&)>> table{
      {"tr-k", run_tr_k},
      {"bcg-fuzz", run_bcg_fuzz},
      {"bcg-extremize", run_bcg_extremize},
      {"busemann-check", run_busemann_check},
      {"rank-scan", run_rank_scan},
      {"lyapunov", run_lyapunov},
      {"barycenter", run_barycenter},
      {"straighten", run_straighten},
      {"jac-scan", run_jac_scan},
      {"bounds", run_bounds},
      {"sigma-compare", run_sigma_compare},
      {"bochner", run_bochner},
  };
  return table;
}

std::string render(const Json& report, const std::string& format) {
  if (format == "json") return dump_json(report);
  const Json& table = report.contains("rows") ? report["rows"] : report;
  if (format == "csv") return dump_csv(table);
  if (format == "text") {
    std::string s = dump_text(table);
    if (report.contains("rows")) s += "status  " + report["status"].get<std::string>() + "\n";
    return s;
  }
  throw ArgumentError("--format must be json, csv or text");
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, fn] : dispatch()) v.push_back(name);
    return v;
  }();
  return names;
}

ModelSpace parse_space(const std::string& spec) {
  static const std::regex torus(R"(T(\d+):([^:]+))");
  static const std::regex factor(R"((H|R)(\d*))");
  std::smatch m;
  if (std::regex_match(spec, m, torus)) {
    const int n = std::stoi(m[1]);
    std::vector<double> periods;
    std::stringstream ss(m[2]);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::size_t used = 0;
      double p = 0.0;
      try {
        p = std::stod(item, &used);
      } catch (const std::exception&) {
        throw ArgumentError("bad torus period '" + item + "'");
      }
      if (used != item.size() || !(p > 0.0)) throw ArgumentError("bad torus period '" + item + "'");
      periods.push_back(p);
    }
    if (static_cast<int>(periods.size()) != n) throw ArgumentError("torus '" + spec + "' needs " + m[1].str() + " periods");
    return ModelSpace::flat_torus(periods);
  }
  if (!spec.empty() && spec.back() == 'x') throw ArgumentError("unknown space '" + spec + "'");
  std::vector<Factor> factors;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, 'x')) {
    if (!std::regex_match(item, m, factor)) throw ArgumentError("unknown space '" + spec + "'");
    const bool hyperbolic = m[1] == "H";
    if (hyperbolic && m[2].length() == 0) throw ArgumentError("hyperbolic factor needs a dimension in '" + spec + "'");
    const int d = m[2].length() ? std::stoi(m[2]) : 1;
    if (d < 1) throw ArgumentError("factor dimension must be positive in '" + spec + "'");
    factors.push_back(Factor{hyperbolic ? FactorKind::Hyperbolic : FactorKind::Euclidean, d});
  }
  if (factors.empty()) throw ArgumentError("unknown space '" + spec + "'");
  if (factors.size() == 1) {
    if (factors[0].kind != FactorKind::Hyperbolic) throw ArgumentError("a lone Euclidean factor is not a supported space");
    return ModelSpace::hyperbolic(factors[0].dim);
  }
  return ModelSpace::product(factors);
}

RunOutcome run(const RunConfig& config) {
  RunOutcome out;
  try {
    const auto it = dispatch().find(config.subcommand);
    if (it == dispatch().end()) throw ArgumentError("unknown subcommand '" + config.subcommand + "'");
    if (config.format != "json" && config.format != "csv" && config.format != "text")
      throw ArgumentError("--format must be json, csv or text");
    const Json report = it->second(config);
    out.report = render(report, config.format);
    const bool pass = report.value("status", "fail") == "pass";
    out.exitCode = pass ? 0 : 1;
    if (!pass && report.contains("failure")) out.message = "property failure: " + dump_json(report["failure"], false);

    std::string path = config.out;
    if (path.empty()) {
      if (const char* dir = std::getenv(kOutDirEnv); dir && *dir)
        path = (std::filesystem::path(dir) / (config.subcommand + "." + config.format)).string();
    }
    if (!path.empty()) {
      write_atomic(path, out.report);
      out.path = path;
    }
  } catch (const ArgumentError& e) {
    out = RunOutcome{2, "", "", std::string("argument error: ") + e.what()};
  } catch (const UnsupportedSpaceError& e) {
    out = RunOutcome{2, "", "", std::string("argument error: ") + e.what()};
  } catch (const PropertyFailure& e) {
    out = RunOutcome{1, "", "", std::string("property failure: ") + e.what() + "\n" + e.sample()};
  } catch (const Error& e) {
    out = RunOutcome{1, "", "", std::string("error: ") + e.what()};
  }
  return out;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Barycentric straightening and Busemann calculus checks on model Hadamard spaces"};
  app.require_subcommand(1);
  RunConfig c;
  double tol = -1.0;
  double u_integral = -1.0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out,-o", c.out, "Report path (default: $" + std::string(kOutDirEnv) + "/<subcommand>.<format> or stdout)");
    sub->add_option("--format", c.format, "json | csv | text")->check(CLI::IsMember({"json", "csv", "text"}));
    sub->add_option("--tol", tol, "Override the primary tolerance");
  };
  auto seeded = [&](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "64-bit seed");
    sub->add_option("--samples", c.samples, "Number of samples");
  };
  auto spaced = [&](CLI::App* sub, const char* fallback) {
    c.space = fallback;
    sub->add_option("--space", c.space, "H<n>, H2xR, H2xH2, T<n>:<p1>,...");
    sub->add_option("--radius", c.radius, "Sampling radius around O");
  };
  std::map<std::string, CLI::App*> subs;
  auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* s = app.add_subcommand(name, help);
    common(s);
    subs[name] = s;
    return s;
  };

  CLI::App* s = add("tr-k", "k-th trace vs eigenvalues and k-plane brute force");
  seeded(s);
  s->add_option("--n", c.n, "Fixed dimension (default: random in 1..10)");
  s->add_option("--k", c.k, "Fixed k (default: random in 1..n)");
  s->add_option("--brute-samples", c.bruteSamples, "Random k-planes per matrix");

  s = add("bcg-fuzz", "Determinant inequality on random (H, K) pairs");
  seeded(s);
  s->add_option("--n", c.n, "Dimension (2 runs the unbounded family)");

  s = add("bcg-extremize", "Maximize the determinant ratio");
  s->add_option("--seed", c.seed, "64-bit seed");
  s->add_option("--n", c.n, "Dimension >= 3");

  s = add("busemann-check", "Busemann closed forms vs limit and finite-difference oracles");
  seeded(s);
  spaced(s, "H3");

  s = add("rank-scan", "u(x), Ric_k, Tr_2 / rank+ equivalence");
  seeded(s);
  s->add_option("--space", c.space, "H<n>, H2xR, H2xH2, T<n>:<p1>,...");
  s->add_option("--radius", c.radius, "Sampling radius around O");

  s = add("lyapunov", "Finite-time lower Lyapunov exponent");
  seeded(s);
  s->add_option("--space", c.space, "H<n>, H2xR, H2xH2, T<n>:<p1>,...");
  s->add_option("--radius", c.radius, "Sampling radius around O");
  s->add_option("--horizon,-T", c.horizon, "Time horizon T >= 10");

  for (const char* name : {"barycenter", "straighten", "jac-scan"}) {
    s = add(name, std::string(name) == "barycenter"   ? "Barycenter solver checks"
                  : std::string(name) == "straighten" ? "Vertex interpolation and face compatibility"
                                                      : "Jacobian bound scan over random simplices");
    seeded(s);
    s->add_option("--space", c.space, "H<n>");
    s->add_option("--radius", c.radius, "Sampling radius around O");
    s->add_option("--grid", c.grid, "Boundary grid gl:<k1>x<k2>...");
    if (std::string(name) == "jac-scan") s->add_flag("--records", c.records, "Include per-sample records");
  }

  s = add("bounds", "Simplicial-volume lower bound and constants");
  s->add_option("--n", c.n, "Dimension >= 3");
  s->add_option("--u-integral", u_integral, "Integral of u^n dV (default: volume * u^n on H^n)");
  s->add_option("--volume", c.volume, "Volume used when --u-integral is absent");

  s = add("sigma-compare", "Compare the ideal-simplex volume bounds");
  s->add_option("--from", c.from, "First n >= 3");
  s->add_option("--to", c.to, "Last n");

  s = add("bochner", "Bochner identity on flat and conformal 2-tori");
  s->add_option("--seed", c.seed, "64-bit seed");
  s->add_option("--grid-res", c.gridRes, "Grid points per period");
  s->add_option("--field", c.field, "flat | mixed | conformal | all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) c.subcommand = name;
  if (tol >= 0.0) c.tol = tol;
  if (subs["bounds"]->count("--u-integral")) c.uIntegral = u_integral;

  const RunOutcome r = run(c);
  if (!r.message.empty()) std::cerr << r.message << "\n";
  if (r.path.empty())
    std::cout << r.report;
  else
    std::cerr << "report written to " << r.path << "\n";
  return r.exitCode;
}

}  // namespace bary
