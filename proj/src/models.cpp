#include "bary/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "bary/errors.hpp"

namespace bary {

double minkowski(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return -a[0] * b[0] + a.tail(a.size() - 1).dot(b.tail(b.size() - 1));
}

Eigen::VectorXd hyperbolic_components(const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  const Eigen::Index m = x.size() - 1;
  const auto xs = x.tail(m);
  const auto us = u.tail(m);
  return us - xs * (xs.dot(us) / (x[0] * (1.0 + x[0])));
}

double hyperbolic_tangent_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  return hyperbolic_components(x, u).norm();
}

double hyperbolic_chord_sq(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index m = x.size() - 1;
  const Eigen::VectorXd d = y.tail(m) - x.tail(m);
  const Eigen::VectorXd a = y.tail(m) + x.tail(m);
  const double an = a.norm();
  if (an == 0.0) return d.squaredNorm();
  // With y0 - x0 = <d, a> / (x0 + y0) and 1 + cosh = 2 + L/2, the chord
  // L = |d_perp|^2 + q (4 + L), q = <d, a/|a|>^2 / (x0 + y0)^2.
  const Eigen::VectorXd ah = a / an;
  const double along = d.dot(ah);
  const double sum = x[0] + y[0];
  const double p = (d - along * ah).squaredNorm();
  const double q = along * along / (sum * sum);
  if (q > 0.5) {
    const double ch = x[0] * y[0] - x.tail(m).dot(y.tail(m));
    if (x[0] * y[0] / ch < 1.0 / (1.0 - q)) return 2.0 * (ch - 1.0);
  }
  return (p + 4.0 * q) / (1.0 - q);
}

Eigen::MatrixXd boost_to(const Eigen::VectorXd& x) {
  const int m = static_cast<int>(x.size());
  const double x0 = x[0];
  const Eigen::VectorXd xs = x.tail(m - 1);
  Eigen::MatrixXd b(m, m);
  b(0, 0) = x0;
  b.block(0, 1, 1, m - 1) = xs.transpose();
  b.block(1, 0, m - 1, 1) = xs;
  b.block(1, 1, m - 1, m - 1) =
      Eigen::MatrixXd::Identity(m - 1, m - 1) + xs * xs.transpose() / (1.0 + x0);
  return b;
}

ModelSpace::ModelSpace(Variant variant, std::vector<Factor> factors, std::vector<double> periods)
    : variant_(variant), factors_(std::move(factors)), periods_(std::move(periods)) {
  for (const Factor& f : factors_) {
    if (f.dim < 1) throw ArgumentError("ModelSpace: factor dimension must be >= 1");
    ambient_offsets_.push_back(ambient_dim_);
    tangent_offsets_.push_back(dim_);
    ambient_dim_ += f.ambient_dim();
    dim_ += f.dim;
  }
  if (dim_ < 2) throw ArgumentError("ModelSpace: total dimension must be >= 2");
}

ModelSpace ModelSpace::hyperbolic(int n) {
  if (n < 2) throw ArgumentError("ModelSpace: H^n requires n >= 2");
  return ModelSpace(Variant::Hyperbolic, {Factor{FactorKind::Hyperbolic, n}}, {});
}

ModelSpace ModelSpace::product(std::vector<Factor> factors) {
  if (factors.size() < 2) throw ArgumentError("ModelSpace: a product needs at least two factors");
  return ModelSpace(Variant::Product, std::move(factors), {});
}

ModelSpace ModelSpace::flat_torus(std::vector<double> periods) {
  if (periods.size() < 2) throw ArgumentError("ModelSpace: flat torus needs dimension >= 2");
  for (double p : periods)
    if (!(p > 0.0) || !std::isfinite(p)) throw ArgumentError("ModelSpace: torus periods must be positive");
  const int n = static_cast<int>(periods.size());
  return ModelSpace(Variant::FlatTorus, {Factor{FactorKind::Euclidean, n}}, std::move(periods));
}

std::string ModelSpace::name() const {
  std::ostringstream os;
  if (variant_ == Variant::FlatTorus) {
    os << "T" << dim_ << ":";
    for (std::size_t i = 0; i < periods_.size(); ++i) os << (i ? "," : "") << periods_[i];
    return os.str();
  }
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (i) os << "x";
    const Factor& f = factors_[i];
    if (f.kind == FactorKind::Hyperbolic) {
      os << "H" << f.dim;
    } else {
      os << "R";
      if (f.dim > 1) os << f.dim;
    }
  }
  return os.str();
}

bool ModelSpace::operator==(const ModelSpace& other) const {
  return variant_ == other.variant_ && factors_ == other.factors_ && periods_ == other.periods_;
}

double ModelSpace::ambient_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  double s = a.dot(b);
  for (std::size_t i = 0; i < factors_.size(); ++i)
    if (factors_[i].kind == FactorKind::Hyperbolic) {
      const int o = ambient_offsets_[i];
      s -= 2.0 * a[o] * b[o];
    }
  return s;
}

double ModelSpace::inner(const Tangent& u, const Tangent& v) const {
  double s = 0.0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const int o = ambient_offsets_[i];
    const int m = factors_[i].ambient_dim();
    if (factors_[i].kind == FactorKind::Hyperbolic) {
      const Eigen::VectorXd xi = u.base.coords.segment(o, m);
      s += hyperbolic_components(xi, u.coords.segment(o, m)).dot(hyperbolic_components(xi, v.coords.segment(o, m)));
    } else {
      s += u.coords.segment(o, m).dot(v.coords.segment(o, m));
    }
  }
  return s;
}

double ModelSpace::norm(const Tangent& u) const { return std::sqrt(std::max(0.0, inner(u, u))); }

Point ModelSpace::origin() const {
  Point o{Eigen::VectorXd::Zero(ambient_dim_)};
  for (std::size_t i = 0; i < factors_.size(); ++i)
    if (factors_[i].kind == FactorKind::Hyperbolic) o.coords[ambient_offsets_[i]] = 1.0;
  return o;
}

double ModelSpace::point_residual(const Point& x) const {
  if (x.coords.size() != ambient_dim_) return std::numeric_limits<double>::infinity();
  double r = 0.0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].kind != FactorKind::Hyperbolic) continue;
    const auto xi = x.coords.segment(ambient_offsets_[i], factors_[i].ambient_dim());
    if (!(xi[0] > 0.0)) return std::numeric_limits<double>::infinity();
    const double t = std::sqrt(1.0 + xi.tail(factors_[i].dim).squaredNorm());
    r = std::max(r, std::abs(xi[0] - t) / xi[0]);
  }
  return r;
}

double ModelSpace::tangent_residual(const Tangent& w) const {
  if (w.coords.size() != ambient_dim_) return std::numeric_limits<double>::infinity();
  double r = 0.0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].kind != FactorKind::Hyperbolic) continue;
    const int o = ambient_offsets_[i];
    const int m = factors_[i].ambient_dim();
    const auto xi = w.base.coords.segment(o, m);
    const auto wi = w.coords.segment(o, m);
    const double scale = xi.norm() * wi.norm();
    if (scale > 0.0) r = std::max(r, std::abs(minkowski(xi, wi)) / scale);
  }
  return r;
}

Point ModelSpace::reproject(const Point& x) const {
  Point y = x;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].kind != FactorKind::Hyperbolic) continue;
    auto xi = y.coords.segment(ambient_offsets_[i], factors_[i].ambient_dim());
    if (!(xi[0] > 0.0) || !xi.allFinite()) throw NumericError("reproject: point left the future sheet");
    xi[0] = std::sqrt(1.0 + xi.tail(factors_[i].dim).squaredNorm());
  }
  return y;
}

Tangent ModelSpace::project_tangent(const Point& x, const Eigen::VectorXd& ambient) const {
  Tangent w{x, ambient};
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].kind != FactorKind::Hyperbolic) continue;
    const int o = ambient_offsets_[i];
    const int m = factors_[i].ambient_dim();
    const Eigen::VectorXd xi = x.coords.segment(o, m);
    w.coords.segment(o, m) += minkowski(xi, w.coords.segment(o, m)) * xi;
  }
  return w;
}

Tangent ModelSpace::zero_tangent(const Point& x) const { return Tangent{x, Eigen::VectorXd::Zero(ambient_dim_)}; }

Eigen::MatrixXd ModelSpace::frame(const Point& x) const {
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(ambient_dim_, dim_);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const Factor& f = factors_[i];
    const int o = ambient_offsets_[i];
    const int t = tangent_offsets_[i];
    if (f.kind == FactorKind::Hyperbolic) {
      e.block(o, t, f.dim + 1, f.dim) = boost_to(x.coords.segment(o, f.dim + 1)).rightCols(f.dim);
    } else {
      e.block(o, t, f.dim, f.dim).setIdentity();
    }
  }
  return e;
}

Eigen::VectorXd ModelSpace::components(const Tangent& w) const {
  Eigen::VectorXd c(dim_);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const int o = ambient_offsets_[i];
    const Factor& f = factors_[i];
    if (f.kind == FactorKind::Hyperbolic)
      c.segment(tangent_offsets_[i], f.dim) =
          hyperbolic_components(w.base.coords.segment(o, f.dim + 1), w.coords.segment(o, f.dim + 1));
    else
      c.segment(tangent_offsets_[i], f.dim) = w.coords.segment(o, f.dim);
  }
  return c;
}

Tangent ModelSpace::from_components(const Point& x, const Eigen::VectorXd& c) const {
  if (c.size() != dim_) throw ArgumentError("from_components: wrong component count");
  return Tangent{x, frame(x) * c};
}

Point ModelSpace::exp_map(const Point& x, const Tangent& w, double t) const {
  Point y{x.coords};
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const int o = ambient_offsets_[i];
    const int m = factors_[i].ambient_dim();
    const Eigen::VectorXd u = t * w.coords.segment(o, m);
    if (factors_[i].kind == FactorKind::Hyperbolic) {
      const double s = std::abs(t) * hyperbolic_tangent_norm(x.coords.segment(o, m), w.coords.segment(o, m));
      if (s == 0.0) continue;
      y.coords.segment(o, m) = std::cosh(s) * x.coords.segment(o, m) + (std::sinh(s) / s) * u;
    } else {
      y.coords.segment(o, m) += u;
    }
  }
  return reproject(y);
}

Tangent ModelSpace::log_map(const Point& x, const Point& y) const {
  Tangent w = zero_tangent(x);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const int o = ambient_offsets_[i];
    const int m = factors_[i].ambient_dim();
    const Eigen::VectorXd delta = y.coords.segment(o, m) - x.coords.segment(o, m);
    if (factors_[i].kind == FactorKind::Hyperbolic) {
      const Eigen::VectorXd xi = x.coords.segment(o, m);
      // |y - x|_L^2 = L = 4 sinh^2(d/2) and <x, y - x> = -L/2, so the
      // tangent part of y - x is (y - x) - (L/2) x.
      const double chord_sq = hyperbolic_chord_sq(xi, y.coords.segment(o, m));
      const double d = 2.0 * std::asinh(0.5 * std::sqrt(chord_sq));
      Eigen::VectorXd u(m);
      u.tail(m - 1) = delta.tail(m - 1) - 0.5 * chord_sq * xi.tail(m - 1);
      u[0] = xi.tail(m - 1).dot(u.tail(m - 1)) / xi[0];
      const double un = hyperbolic_tangent_norm(xi, u);
      if (un == 0.0 || d == 0.0) continue;
      w.coords.segment(o, m) = (d / un) * u;
    } else {
      w.coords.segment(o, m) = delta;
    }
  }
  return w;
}

double ModelSpace::dist(const Point& x, const Point& y) const {
  double s = 0.0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const int o = ambient_offsets_[i];
    const int m = factors_[i].ambient_dim();
    const Eigen::VectorXd delta = y.coords.segment(o, m) - x.coords.segment(o, m);
    if (factors_[i].kind == FactorKind::Hyperbolic) {
      const double d =
          2.0 * std::asinh(0.5 * std::sqrt(hyperbolic_chord_sq(x.coords.segment(o, m), y.coords.segment(o, m))));
      s += d * d;
    } else {
      s += delta.squaredNorm();
    }
  }
  return std::sqrt(s);
}

Tangent ModelSpace::transport(const Tangent& w, const Point& y) const {
  Tangent out{y, w.coords};
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].kind != FactorKind::Hyperbolic) continue;
    const int o = ambient_offsets_[i];
    const int m = factors_[i].ambient_dim();
    const Eigen::VectorXd xi = w.base.coords.segment(o, m);
    const Eigen::VectorXd yi = y.coords.segment(o, m);
    const Eigen::VectorXd vi = w.coords.segment(o, m);
    // <y, v> = <y - x, v> and 1 - <x, y> = 2 + L/2.
    const double denom = 2.0 + 0.5 * hyperbolic_chord_sq(xi, yi);
    out.coords.segment(o, m) = vi + (minkowski(yi - xi, vi) / denom) * (xi + yi);
  }
  return out;
}

namespace {

// Algebraic curvature of a product of constant-curvature factors, in frame
// components: R(u,v)w = sum_blocks kappa (<v,w> u - <u,w> v).
Eigen::VectorXd curvature_components(const ModelSpace& space, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                                     const Eigen::VectorXd& w) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(space.dim());
  for (std::size_t i = 0; i < space.factors().size(); ++i) {
    const Factor& f = space.factors()[i];
    if (f.curvature() == 0.0) continue;
    const int t = space.factor_tangent_offset(static_cast<int>(i));
    const auto ub = u.segment(t, f.dim);
    const auto vb = v.segment(t, f.dim);
    const auto wb = w.segment(t, f.dim);
    r.segment(t, f.dim) = f.curvature() * (vb.dot(wb) * ub - ub.dot(wb) * vb);
  }
  return r;
}

void require_same_base(const Tangent& a, const Tangent& b) {
  if (a.base.coords.size() != b.base.coords.size() ||
      (a.base.coords - b.base.coords).cwiseAbs().maxCoeff() > 1e-12)
    throw ArgumentError("tangent vectors are based at different points");
}

}  // namespace

Tangent ModelSpace::curvature(const Tangent& u, const Tangent& v, const Tangent& w) const {
  require_same_base(u, v);
  require_same_base(u, w);
  return from_components(u.base, curvature_components(*this, components(u), components(v), components(w)));
}

double ModelSpace::curvature_form(const Tangent& u, const Tangent& v, const Tangent& w, const Tangent& z) const {
  require_same_base(u, z);
  return components(curvature(u, v, w)).dot(components(z));
}

double ModelSpace::sectional(const Tangent& u, const Tangent& v) const {
  require_same_base(u, v);
  const Eigen::VectorXd cu = components(u);
  const Eigen::VectorXd cv = components(v);
  const double area2 = cu.squaredNorm() * cv.squaredNorm() - std::pow(cu.dot(cv), 2);
  if (area2 <= 1e-14 * cu.squaredNorm() * cv.squaredNorm() || area2 <= 0.0)
    throw ArgumentError("sectional: u and v do not span a 2-plane");
  return curvature_components(*this, cu, cv, cv).dot(cu) / area2;
}

Eigen::MatrixXd ModelSpace::directional_curvature_matrix(const Eigen::VectorXd& vc) const {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(dim_, dim_);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const Factor& f = factors_[i];
    if (f.curvature() == 0.0) continue;
    const int t = tangent_offsets_[i];
    const Eigen::VectorXd vb = vc.segment(t, f.dim);
    r.block(t, t, f.dim, f.dim) =
        f.curvature() * (vb.squaredNorm() * Eigen::MatrixXd::Identity(f.dim, f.dim) - vb * vb.transpose());
  }
  return r;
}

SymOp ModelSpace::directional_curvature(const Tangent& v) const {
  return SymOp(directional_curvature_matrix(components(v)));
}

Point ModelSpace::apply(const Isometry& g, const Point& x) const {
  return reproject(Point{g.linear * x.coords + g.translation});
}

Tangent ModelSpace::apply(const Isometry& g, const Tangent& w) const {
  return Tangent{apply(g, w.base), g.linear * w.coords};
}

BoundaryPoint ModelSpace::apply(const Isometry& g, const BoundaryPoint& theta) const {
  BoundaryPoint out{g.linear * theta.coords, theta.weights};
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].kind != FactorKind::Hyperbolic || theta.weights[static_cast<int>(i)] == 0.0) continue;
    auto xi = out.coords.segment(ambient_offsets_[i], factors_[i].ambient_dim());
    xi /= xi[0];
  }
  return out;
}

double ModelSpace::isometry_residual(const Isometry& g) const {
  if (g.linear.rows() != ambient_dim_ || g.linear.cols() != ambient_dim_ || g.translation.size() != ambient_dim_)
    return std::numeric_limits<double>::infinity();
  Eigen::VectorXd sign = Eigen::VectorXd::Ones(ambient_dim_);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].kind != FactorKind::Hyperbolic) continue;
    const int o = ambient_offsets_[i];
    sign[o] = -1.0;
    if (g.linear(o, o) <= 0.0) return std::numeric_limits<double>::infinity();
    if (g.translation.segment(o, factors_[i].ambient_dim()).cwiseAbs().maxCoeff() > 0.0)
      return std::numeric_limits<double>::infinity();
  }
  const Eigen::MatrixXd j = sign.asDiagonal();
  double r = (g.linear.transpose() * j * g.linear - j).cwiseAbs().maxCoeff();
  // Off-block entries would mix factors.
  for (std::size_t a = 0; a < factors_.size(); ++a)
    for (std::size_t b = 0; b < factors_.size(); ++b) {
      if (a == b) continue;
      r = std::max(r, g.linear
                          .block(ambient_offsets_[a], ambient_offsets_[b], factors_[a].ambient_dim(),
                                 factors_[b].ambient_dim())
                          .cwiseAbs()
                          .maxCoeff());
    }
  return r;
}

Point ModelSpace::random_point(Rng& rng, double radius) const {
  const Point o = origin();
  const Eigen::VectorXd dir = unit_vector(rng, dim_);
  return exp_map(o, from_components(o, dir), radius * uniform01(rng));
}

Tangent ModelSpace::random_unit_tangent(Rng& rng, const Point& x) const {
  return from_components(x, unit_vector(rng, dim_));
}

Tangent ModelSpace::random_tangent(Rng& rng, const Point& x, double scale) const {
  return from_components(x, scale * gaussian_vector(rng, dim_));
}

Isometry ModelSpace::random_isometry(Rng& rng, double boost_radius) const {
  Isometry g{Eigen::MatrixXd::Zero(ambient_dim_, ambient_dim_), Eigen::VectorXd::Zero(ambient_dim_)};
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const Factor& f = factors_[i];
    const int o = ambient_offsets_[i];
    const Eigen::MatrixXd q = random_orthogonal(rng, f.dim);
    if (f.kind == FactorKind::Hyperbolic) {
      Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(f.dim + 1, f.dim + 1);
      rot.bottomRightCorner(f.dim, f.dim) = q;
      Eigen::VectorXd target = Eigen::VectorXd::Zero(f.dim + 1);
      const Eigen::VectorXd dir = unit_vector(rng, f.dim);
      const double r = boost_radius * uniform01(rng);
      target[0] = std::cosh(r);
      target.tail(f.dim) = std::sinh(r) * dir;
      g.linear.block(o, o, f.dim + 1, f.dim + 1) = boost_to(target) * rot;
    } else {
      g.linear.block(o, o, f.dim, f.dim) = q;
      g.translation.segment(o, f.dim) = boost_radius * gaussian_vector(rng, f.dim);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Geodesics, Jacobi fields, Lyapunov exponents.

Geodesic::Geodesic(const ModelSpace& space, Tangent v) : space_(&space), v_(std::move(v)) {}

Point Geodesic::at(double t) const { return space_->exp_map(v_.base, v_, t); }

Tangent Geodesic::velocity(double t) const {
  const Point y = at(t);
  Tangent out{y, v_.coords};
  const auto& factors = space_->factors();
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (factors[i].kind != FactorKind::Hyperbolic) continue;
    const int o = space_->factor_ambient_offset(static_cast<int>(i));
    const int m = factors[i].ambient_dim();
    const Eigen::VectorXd vi = v_.coords.segment(o, m);
    const double s = hyperbolic_tangent_norm(v_.base.coords.segment(o, m), vi);
    if (s == 0.0) continue;
    out.coords.segment(o, m) = s * (std::sinh(t * s) * v_.base.coords.segment(o, m) + std::cosh(t * s) * (vi / s));
  }
  return space_->project_tangent(y, out.coords);
}

Tangent Geodesic::transport(const Tangent& w, double t) const { return space_->transport(w, at(t)); }

namespace {

// Matrix of a -> R(a, g')g' in the parallel frame transported from the
// canonical frame at g(0).
Eigen::MatrixXd parallel_curvature(const ModelSpace& space, const Geodesic& g, const Eigen::MatrixXd& frame0,
                                   double t) {
  const Point y = g.at(t);
  const int n = space.dim();
  // Columns: components of the transported initial frame in frame(y).
  Eigen::MatrixXd c(n, n);
  for (int l = 0; l < n; ++l) {
    const Tangent e{g.initial().base, frame0.col(l)};
    c.col(l) = space.components(space.transport(e, y));
  }
  const Eigen::VectorXd vc = space.components(g.velocity(t));
  // <R(a,v)v, b> = -(directional form) with our sign: directional_curvature_matrix
  // is the NSD form (a,b) -> <R(a,v)v,b>.
  return c.transpose() * space.directional_curvature_matrix(vc) * c;
}

void require_unit(const ModelSpace& space, const Tangent& v) {
  if (space.tangent_residual(v) > 1e-9) throw ArgumentError("tangent not orthogonal to its basepoint");
  if (std::abs(space.norm(v) - 1.0) > 1e-9) throw ArgumentError("direction must be a unit vector");
}

}  // namespace

JacobiPath jacobi_solve(const ModelSpace& space, const Tangent& v, const Tangent& j0, const Tangent& j0dot, double T,
                        int steps) {
  if (steps < 10) throw ArgumentError("jacobi_solve: at least 10 steps required");
  if (!(T > 0.0)) throw ArgumentError("jacobi_solve: T must be positive");
  require_unit(space, v);
  require_same_base(v, j0);
  require_same_base(v, j0dot);
  const double scale = 1.0 + space.norm(j0) + space.norm(j0dot);
  if (std::abs(space.inner(v, j0)) > 1e-9 * scale || std::abs(space.inner(v, j0dot)) > 1e-9 * scale)
    throw ArgumentError("jacobi_solve: initial data must be orthogonal to v");

  const Geodesic g(space, v);
  const Eigen::MatrixXd frame0 = space.frame(v.base);
  const int n = space.dim();
  Eigen::VectorXd j = space.components(j0);
  Eigen::VectorXd p = space.components(j0dot);
  const double h = T / steps;

  JacobiPath path;
  auto record = [&](double t) {
    const Point y = g.at(t);
    Eigen::VectorXd ja = Eigen::VectorXd::Zero(space.ambient_dim());
    Eigen::VectorXd pa = Eigen::VectorXd::Zero(space.ambient_dim());
    for (int l = 0; l < n; ++l) {
      const Tangent e = space.transport(Tangent{v.base, frame0.col(l)}, y);
      ja += j[l] * e.coords;
      pa += p[l] * e.coords;
    }
    path.times.push_back(t);
    path.fields.push_back(space.project_tangent(y, ja));
    path.derivatives.push_back(space.project_tangent(y, pa));
  };

  record(0.0);
  for (int s = 0; s < steps; ++s) {
    const double t = s * h;
    const Eigen::MatrixXd r0 = parallel_curvature(space, g, frame0, t);
    const Eigen::MatrixXd r1 = parallel_curvature(space, g, frame0, t + 0.5 * h);
    const Eigen::MatrixXd r2 = parallel_curvature(space, g, frame0, t + h);
    const Eigen::VectorXd k1j = p, k1p = -r0 * j;
    const Eigen::VectorXd k2j = p + 0.5 * h * k1p, k2p = -r1 * (j + 0.5 * h * k1j);
    const Eigen::VectorXd k3j = p + 0.5 * h * k2p, k3p = -r1 * (j + 0.5 * h * k2j);
    const Eigen::VectorXd k4j = p + h * k3p, k4p = -r2 * (j + h * k3j);
    j += (h / 6.0) * (k1j + 2.0 * k2j + 2.0 * k3j + k4j);
    p += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    record(t + h);
  }
  return path;
}

LyapunovEstimate lyapunov_lower(const ModelSpace& space, const Tangent& v, double T, double step) {
  if (!(T >= 10.0)) throw ArgumentError("lyapunov_lower: T >= 10 required");
  if (!(step > 0.0)) throw ArgumentError("lyapunov_lower: step must be positive");
  require_unit(space, v);
  const int n = space.dim();
  const Geodesic g(space, v);
  const Eigen::MatrixXd frame0 = space.frame(v.base);

  // Orthonormal basis of v-perp in frame components.
  const Eigen::VectorXd vc = space.components(v);
  const Eigen::MatrixXd vc_mat = vc;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(vc_mat);
  const Eigen::MatrixXd q_full = qr.householderQ();
  const Eigen::MatrixXd q = q_full.rightCols(n - 1);
  // The model spaces are locally symmetric, so the curvature operator is
  // constant in a parallel frame; evaluating it far out along the geodesic
  // would only lose digits in the hyperboloid coordinates.
  const Eigen::MatrixXd r_perp = q.transpose() * parallel_curvature(space, g, frame0, 0.0) * q;
  auto perp_curvature = [&](double) -> const Eigen::MatrixXd& { return r_perp; };

  const int steps = static_cast<int>(std::ceil(T / step));
  const double h = T / steps;
  const int m = n - 1;

  // Riccati U' = -U^2 - R on [-T, 0], U(-T) = 0.
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(m, m);
  for (int s = 0; s < steps; ++s) {
    const double t = -T + s * h;
    const Eigen::MatrixXd r0 = perp_curvature(t);
    const Eigen::MatrixXd r1 = perp_curvature(t + 0.5 * h);
    const Eigen::MatrixXd r2 = perp_curvature(t + h);
    auto f = [](const Eigen::MatrixXd& uu, const Eigen::MatrixXd& rr) -> Eigen::MatrixXd { return -uu * uu - rr; };
    const Eigen::MatrixXd k1 = f(u, r0);
    const Eigen::MatrixXd k2 = f(u + 0.5 * h * k1, r1);
    const Eigen::MatrixXd k3 = f(u + 0.5 * h * k2, r1);
    const Eigen::MatrixXd k4 = f(u + h * k3, r2);
    u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!u.allFinite() || u.cwiseAbs().maxCoeff() > 1e8)
      throw NumericError("lyapunov_lower: internal error, Riccati solution blew up");
  }
  u = 0.5 * (u + u.transpose());

  // Unstable Jacobi tensor on [0, T].
  Eigen::MatrixXd y = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd yp = u;
  for (int s = 0; s < steps; ++s) {
    const double t = s * h;
    const Eigen::MatrixXd r0 = perp_curvature(t);
    const Eigen::MatrixXd r1 = perp_curvature(t + 0.5 * h);
    const Eigen::MatrixXd r2 = perp_curvature(t + h);
    const Eigen::MatrixXd k1y = yp, k1p = -r0 * y;
    const Eigen::MatrixXd k2y = yp + 0.5 * h * k1p, k2p = -r1 * (y + 0.5 * h * k1y);
    const Eigen::MatrixXd k3y = yp + 0.5 * h * k2p, k3p = -r1 * (y + 0.5 * h * k2y);
    const Eigen::MatrixXd k4y = yp + h * k3p, k4p = -r2 * (y + h * k3y);
    y += (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    yp += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(y);
  Eigen::VectorXd ex = svd.singularValues().array().log() / T;
  std::sort(ex.data(), ex.data() + ex.size());
  return LyapunovEstimate{ex[0], ex, u};
}

}  // namespace bary
