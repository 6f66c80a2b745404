#include "bary/busemann.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "bary/errors.hpp"

namespace bary {

namespace {

constexpr double kBoundaryTol = 1e-10;

// -<x, xi> for a hyperboloid point x and a null vector xi, without the
// cancellation of x0 xi0 - <xbar, xibar> when x lies far out toward xi.
double horo_pairing(const Eigen::VectorXd& x, const Eigen::VectorXd& xi) {
  const Eigen::Index d = x.size() - 1;
  const double len = xi.tail(d).norm();
  const Eigen::VectorXd s = xi.tail(d) / len;
  const double p = x.tail(d).dot(s);
  if (p <= 0.0) return len * (x[0] - p);
  return len * (1.0 + (x.tail(d) - p * s).squaredNorm()) / (x[0] + p);
}

}  // namespace

void check_boundary_point(const ModelSpace& space, const BoundaryPoint& theta) {
  const auto& factors = space.factors();
  if (theta.coords.size() != space.ambient_dim() || theta.weights.size() != static_cast<int>(factors.size()))
    throw ArgumentError("boundary point does not match the space layout");
  if ((theta.weights.array() < 0.0).any()) throw ArgumentError("boundary weights must be nonnegative");
  if (std::abs(theta.weights.squaredNorm() - 1.0) > kBoundaryTol)
    throw ArgumentError("boundary weights must have unit norm");
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (theta.weights[static_cast<int>(i)] == 0.0) continue;
    const int o = space.factor_ambient_offset(static_cast<int>(i));
    const Eigen::VectorXd xi = theta.coords.segment(o, factors[i].ambient_dim());
    if (factors[i].kind == FactorKind::Hyperbolic) {
      if (std::abs(xi[0] - 1.0) > kBoundaryTol || std::abs(minkowski(xi, xi)) > kBoundaryTol)
        throw ArgumentError("hyperbolic ideal point must be a null vector with <O,xi> = -1");
    } else if (std::abs(xi.norm() - 1.0) > kBoundaryTol) {
      throw ArgumentError("Euclidean ideal point must be a unit direction");
    }
  }
}

BoundaryPoint boundary_from_direction(const ModelSpace& space, const Eigen::VectorXd& s, int factor) {
  const auto& factors = space.factors();
  if (factor < 0 || factor >= static_cast<int>(factors.size())) throw ArgumentError("factor index out of range");
  const Factor& f = factors[factor];
  if (s.size() != f.dim) throw ArgumentError("direction has the wrong dimension");
  const double len = s.norm();
  if (!(len > 0.0)) throw ArgumentError("direction must be nonzero");
  BoundaryPoint theta{Eigen::VectorXd::Zero(space.ambient_dim()), Eigen::VectorXd::Zero(factors.size())};
  const int o = space.factor_ambient_offset(factor);
  if (f.kind == FactorKind::Hyperbolic) {
    theta.coords[o] = 1.0;
    theta.coords.segment(o + 1, f.dim) = s / len;
  } else {
    theta.coords.segment(o, f.dim) = s / len;
  }
  theta.weights[factor] = 1.0;
  return theta;
}

BoundaryPoint boundary_toward(const ModelSpace& space, const Tangent& v) {
  const auto& factors = space.factors();
  BoundaryPoint theta{Eigen::VectorXd::Zero(space.ambient_dim()), Eigen::VectorXd::Zero(factors.size())};
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const int o = space.factor_ambient_offset(static_cast<int>(i));
    const int m = factors[i].ambient_dim();
    const Eigen::VectorXd vi = v.coords.segment(o, m);
    const Eigen::VectorXd xi = v.base.coords.segment(o, m);
    if (factors[i].kind == FactorKind::Hyperbolic) {
      const double c = hyperbolic_tangent_norm(xi, vi);
      if (c == 0.0) continue;
      const Eigen::VectorXd null = xi + vi / c;
      theta.coords.segment(o, m) = null / null[0];
      theta.weights[static_cast<int>(i)] = c;
    } else {
      const double c = vi.norm();
      if (c == 0.0) continue;
      theta.coords.segment(o, m) = vi / c;
      theta.weights[static_cast<int>(i)] = c;
    }
  }
  const double total = theta.weights.norm();
  if (!(total > 0.0)) throw ArgumentError("boundary_toward: zero direction");
  theta.weights /= total;
  return theta;
}

double busemann(const ModelSpace& space, const Point& x, const BoundaryPoint& theta) {
  check_boundary_point(space, theta);
  const auto& factors = space.factors();
  const Point o = space.origin();
  double b = 0.0;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const double c = theta.weights[static_cast<int>(i)];
    if (c == 0.0) continue;
    const int off = space.factor_ambient_offset(static_cast<int>(i));
    const int m = factors[i].ambient_dim();
    const Eigen::VectorXd xi = theta.coords.segment(off, m);
    if (factors[i].kind == FactorKind::Hyperbolic) {
      b += c * std::log(horo_pairing(x.coords.segment(off, m), xi));
    } else {
      b -= c * (x.coords.segment(off, m) - o.coords.segment(off, m)).dot(xi);
    }
  }
  return b;
}

double busemann(const ModelSpace& space, const Point& x, const BoundaryPoint& theta, const Point& basepoint) {
  return busemann(space, x, theta) - busemann(space, basepoint, theta);
}

Tangent grad_busemann(const ModelSpace& space, const Point& x, const BoundaryPoint& theta) {
  check_boundary_point(space, theta);
  const auto& factors = space.factors();
  Tangent g = space.zero_tangent(x);
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const double c = theta.weights[static_cast<int>(i)];
    if (c == 0.0) continue;
    const int off = space.factor_ambient_offset(static_cast<int>(i));
    const int m = factors[i].ambient_dim();
    const Eigen::VectorXd xi = theta.coords.segment(off, m);
    if (factors[i].kind == FactorKind::Hyperbolic) {
      const Eigen::VectorXd xx = x.coords.segment(off, m);
      g.coords.segment(off, m) = c * (xx - xi / horo_pairing(xx, xi));
    } else {
      g.coords.segment(off, m) = -c * xi;
    }
  }
  return g;
}

SymOp hess_busemann(const ModelSpace& space, const Point& x, const BoundaryPoint& theta) {
  check_boundary_point(space, theta);
  const auto& factors = space.factors();
  const int n = space.dim();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  const Eigen::MatrixXd frame = space.frame(x);
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const double c = theta.weights[static_cast<int>(i)];
    if (c == 0.0 || factors[i].kind != FactorKind::Hyperbolic) continue;
    const int off = space.factor_ambient_offset(static_cast<int>(i));
    const int t = space.factor_tangent_offset(static_cast<int>(i));
    const int d = factors[i].dim;
    const Eigen::VectorXd xx = x.coords.segment(off, d + 1);
    const Eigen::VectorXd xi = theta.coords.segment(off, d + 1);
    Eigen::VectorXd unit_grad = xx - xi / horo_pairing(xx, xi);
    unit_grad[0] = -unit_grad[0];
    const Eigen::VectorXd gc = frame.block(off, t, d + 1, d).transpose() * unit_grad;
    h.block(t, t, d, d) = c * (Eigen::MatrixXd::Identity(d, d) - gc * gc.transpose());
  }
  return SymOp(h);
}

BusemannEval evaluate_busemann(const ModelSpace& space, const Point& x, const BoundaryPoint& theta) {
  return BusemannEval{busemann(space, x, theta), grad_busemann(space, x, theta), hess_busemann(space, x, theta)};
}

Tangent direction_to(const ModelSpace& space, const Point& x, const BoundaryPoint& theta) {
  Tangent g = grad_busemann(space, x, theta);
  g.coords = -g.coords;
  return g;
}

Eigen::VectorXd hyperbolic_gradient_components(const Eigen::MatrixXd& frame_t_j, const Eigen::VectorXd& x,
                                               const Eigen::VectorXd& s, double& neg_pairing) {
  const int n = static_cast<int>(s.size());
  neg_pairing = x[0] - x.tail(n).dot(s);
  // grad = x - xi / (-<x,xi>); frame components of x vanish.
  return -(frame_t_j.col(0) + frame_t_j.rightCols(n) * s) / neg_pairing;
}

SymOp busemann_hessian_along(const ModelSpace& space, const Tangent& v) {
  return hess_busemann(space, v.base, boundary_toward(space, v));
}

namespace {

double tr2_along(const ModelSpace& space, const Point& x, const Eigen::VectorXd& vc) {
  return trace_k(busemann_hessian_along(space, space.from_components(x, vc / vc.norm())), 2);
}

}  // namespace

double u_of_x(const ModelSpace& space, const Point& x, const UOfXOptions& options) {
  if (options.samples < 100) throw ArgumentError("u_of_x: at least 100 samples required");
  const int n = space.dim();
  Rng rng(mix_seed(options.seed, 0x75));
  Eigen::VectorXd best_v;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < options.samples; ++i) {
    const Eigen::VectorXd v = unit_vector(rng, n);
    const double f = tr2_along(space, x, v);
    if (f < best) {
      best = f;
      best_v = v;
    }
  }
  // Projected gradient descent on the unit sphere, central differences.
  constexpr double kFdStep = 1e-6;
  for (int it = 0; it < options.refineIterations; ++it) {
    Eigen::VectorXd grad(n);
    for (int k = 0; k < n; ++k) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e[k] = kFdStep;
      grad[k] = (tr2_along(space, x, best_v + e) - tr2_along(space, x, best_v - e)) / (2.0 * kFdStep);
    }
    grad -= grad.dot(best_v) * best_v;
    if (grad.norm() <= 1e-6) break;
    for (double eta = 1.0; eta > 1e-8; eta *= 0.5) {
      Eigen::VectorXd trial = best_v - eta * grad;
      trial.normalize();
      const double f = tr2_along(space, x, trial);
      if (f < best) {
        best = f;
        best_v = trial;
        break;
      }
    }
  }
  return best;
}

double ric_k(const ModelSpace& space, const Tangent& v, int k) { return trace_k(space.directional_curvature(v), k); }

int rank_plus(const ModelSpace& space, const Point& x, const BoundaryPoint& theta, double tol) {
  if (!(tol > 0.0)) throw ArgumentError("rank_plus: tol must be positive");
  const SymOp h = hess_busemann(space, x, theta);
  const double cut = tol * (h.max_eigenvalue() + 1.0);
  int count = 0;
  for (double e : h.eigenvalues())
    if (e < cut) ++count;
  return count;
}

bool tr2_rank_equivalence(const ModelSpace& space, const Point& x, const BoundaryPoint& theta) {
  const bool tr2_positive = trace_k(hess_busemann(space, x, theta), 2) > 1e-8;
  return tr2_positive == (rank_plus(space, x, theta) == 1);
}

BoundaryPoint random_boundary_point(const ModelSpace& space, Rng& rng, double single_factor_prob) {
  const auto& factors = space.factors();
  const int nf = static_cast<int>(factors.size());
  BoundaryPoint theta{Eigen::VectorXd::Zero(space.ambient_dim()), Eigen::VectorXd::Zero(nf)};
  if (nf == 1 || uniform01(rng) < single_factor_prob) {
    const int pick = nf == 1 ? 0 : std::uniform_int_distribution<int>(0, nf - 1)(rng);
    theta.weights[pick] = 1.0;
  } else {
    theta.weights = gaussian_vector(rng, nf).cwiseAbs();
    theta.weights /= theta.weights.norm();
  }
  for (int i = 0; i < nf; ++i) {
    const int o = space.factor_ambient_offset(i);
    const Eigen::VectorXd s = unit_vector(rng, factors[i].dim);
    if (factors[i].kind == FactorKind::Hyperbolic) {
      theta.coords[o] = 1.0;
      theta.coords.segment(o + 1, factors[i].dim) = s;
    } else {
      theta.coords.segment(o, factors[i].dim) = s;
    }
  }
  return theta;
}

}  // namespace bary
