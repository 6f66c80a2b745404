#include "bary/barycenter.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "bary/busemann.hpp"
#include "bary/errors.hpp"

namespace bary {

namespace {

void require_probability(const ModelSpace& space, const BoundaryMeasure& nu) {
  if (!space.is_pure_hyperbolic())
    throw UnsupportedSpaceError("barycenters are only computed on pure H^n (got " + space.name() + ")");
  if (nu.grid()->hyperbolic_dim() != space.dim()) throw ArgumentError("measure grid does not match the space");
  if (std::abs(nu.mass() - 1.0) > 1e-9) throw ArgumentError("barycenter requires a probability measure");
}

// Frame^T J at x: rows give frame components of ambient vectors.
Eigen::MatrixXd frame_t_j(const ModelSpace& space, const Point& x) {
  Eigen::MatrixXd ftj = space.frame(x).transpose();
  ftj.col(0) *= -1.0;
  return ftj;
}

}  // namespace

BnuLocal bnu_local(const ModelSpace& space, const Point& x, const BoundaryMeasure& nu) {
  require_probability(space, nu);
  const int n = space.dim();
  const Eigen::MatrixXd& dirs = nu.grid()->directions();
  const Eigen::VectorXd& mass = nu.node_mass();
  const Eigen::MatrixXd ftj = frame_t_j(space, x);

  // -<x, xi_j> for every node, then the frame components of grad B.
  const Eigen::RowVectorXd pairing =
      (x.coords[0] - (x.coords.tail(n).transpose() * dirs).array()).matrix();
  if (!(pairing.minCoeff() > 0.0)) throw NumericError("bnu_local: degenerate Busemann pairing");
  Eigen::MatrixXd grads = ftj.rightCols(n) * dirs;
  grads.colwise() += ftj.col(0);
  grads.array().rowwise() /= -pairing.array();

  BnuLocal out;
  out.value = pairing.array().log().matrix().dot(mass);
  out.gradient = grads * mass;
  out.h = grads * mass.asDiagonal() * grads.transpose();
  out.h = 0.5 * (out.h + out.h.transpose());
  // DdB = g - dB (x) dB at every node.
  out.k = nu.mass() * Eigen::MatrixXd::Identity(n, n) - out.h;
  return out;
}

double bnu_value(const ModelSpace& space, const Point& x, const BoundaryMeasure& nu,
                 const std::optional<Point>& basepoint) {
  const double v = bnu_local(space, x, nu).value;
  if (!basepoint) return v;
  return v - bnu_local(space, *basepoint, nu).value;
}

Tangent bnu_grad(const ModelSpace& space, const Point& x, const BoundaryMeasure& nu) {
  return space.from_components(x, bnu_local(space, x, nu).gradient);
}

SymOp bnu_hess(const ModelSpace& space, const Point& x, const BoundaryMeasure& nu) {
  return SymOp(bnu_local(space, x, nu).k);
}

SymOp bnu_second_moment(const ModelSpace& space, const Point& x, const BoundaryMeasure& nu) {
  return SymOp(bnu_local(space, x, nu).h);
}

Point barycenter_initial_guess(const ModelSpace& space, const BoundaryMeasure& nu) {
  Eigen::VectorXd m = nu.mean_direction() / nu.mass();
  const double r = m.norm();
  if (!(r > 1e-14)) return space.origin();
  if (r > 0.999) m *= 0.999 / r;
  const double r2 = m.squaredNorm();
  Point x{Eigen::VectorXd(space.ambient_dim())};
  x.coords[0] = (1.0 + r2) / (1.0 - r2);
  x.coords.tail(space.dim()) = 2.0 * m / (1.0 - r2);
  return space.reproject(x);
}

BarycenterResult bar(const ModelSpace& space, const BoundaryMeasure& nu, const BarycenterOptions& options) {
  require_probability(space, nu);
  if (options.maxIterations < 1) throw ArgumentError("bar: maxIterations must be >= 1");
  Point x = options.initial ? *options.initial : barycenter_initial_guess(space, nu);
  BnuLocal local = bnu_local(space, x, nu);
  double min_eig_seen = std::numeric_limits<double>::infinity();

  auto result_at = [&](int iterations) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(local.k, Eigen::EigenvaluesOnly);
    return BarycenterResult{x, local.gradient.norm(), iterations, es.eigenvalues()[0], min_eig_seen};
  };

  for (int it = 0;; ++it) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(local.k, Eigen::EigenvaluesOnly);
    const double kmin = es.eigenvalues()[0];
    min_eig_seen = std::min(min_eig_seen, kmin);
    if (kmin <= 1e-12) throw ConditioningError("bar: Hessian of B_nu is not positive definite at an iterate");
    const double gnorm = local.gradient.norm();
    if (gnorm <= options.gradTol) return result_at(it);
    if (it >= options.maxIterations)
      throw ConvergenceErrorWith<BarycenterResult>("bar: no convergence within " +
                                                       std::to_string(options.maxIterations) + " iterations",
                                                   result_at(it));

    const Eigen::VectorXd step = -local.k.llt().solve(local.gradient);
    const double slope = local.gradient.dot(step);
    const Tangent dir = space.from_components(x, step);
    bool accepted = false;
    for (double t = 1.0; t > 1e-12; t *= options.backtrack) {
      const Point y = space.exp_map(x, dir, t);
      BnuLocal trial = bnu_local(space, y, nu);
      const bool armijo = trial.value <= local.value + options.armijo * t * slope;
      // Near the minimum the decrease drops below the rounding of B_nu;
      // the gradient norm is then the reliable merit function.
      const bool roundoff_regime = -slope < 1e-10 && trial.gradient.norm() < gnorm;
      if (armijo || roundoff_regime) {
        x = y;
        local = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw ConvergenceErrorWith<BarycenterResult>("bar: line search failed to make progress", result_at(it));
  }
}

}  // namespace bary
