#pragma once

#include <optional>

#include "bary/boundary.hpp"
#include "bary/models.hpp"
#include "bary/symops.hpp"

namespace bary {

/// Averaged Busemann functional B_nu(x) = integral of B(x, theta) dnu, with
/// B normalized at `basepoint` (default O).
double bnu_value(const ModelSpace& space, const Point& x, const BoundaryMeasure& nu,
                 const std::optional<Point>& basepoint = std::nullopt);
Tangent bnu_grad(const ModelSpace& space, const Point& x, const BoundaryMeasure& nu);
/// K_{x,nu}: integrated Busemann Hessian, in the canonical frame at x.
SymOp bnu_hess(const ModelSpace& space, const Point& x, const BoundaryMeasure& nu);
/// H_{x,nu}: integrated dB (x) dB, in the canonical frame at x.
SymOp bnu_second_moment(const ModelSpace& space, const Point& x, const BoundaryMeasure& nu);

/// Everything the Newton solver and the Jacobian report need at one point,
/// from a single pass over the quadrature nodes.
struct BnuLocal {
  double value;
  Eigen::VectorXd gradient;  // frame components
  Eigen::MatrixXd h;         // integral of dB (x) dB
  Eigen::MatrixXd k;         // integral of DdB
};
BnuLocal bnu_local(const ModelSpace& space, const Point& x, const BoundaryMeasure& nu);

struct BarycenterOptions {
  double gradTol = 1e-10;
  int maxIterations = 100;
  double armijo = 1e-4;
  double backtrack = 0.5;
  std::optional<Point> basepoint;
  std::optional<Point> initial;
};

struct BarycenterResult {
  Point point;
  double gradNorm;
  int iterations;
  double hessMinEig;          // at the returned point
  double minIterateHessEig;   // min over every Newton iterate
};

/// bar(nu): the unique minimizer of B_nu on H^n, by damped Newton
/// (direction -K^{-1} grad, exp-map retraction, Armijo backtracking).
/// Starts from the Poincare-ball lift of the measure's mean direction.
/// UnsupportedSpaceError off H^n; ArgumentError unless nu is a probability
/// measure; ConditioningError if K degenerates; ConvergenceErrorWith
/// <BarycenterResult> at the iteration cap.
BarycenterResult bar(const ModelSpace& space, const BoundaryMeasure& nu, const BarycenterOptions& options = {});

/// Starting point used by bar(): mean direction m lifted from the ball.
Point barycenter_initial_guess(const ModelSpace& space, const BoundaryMeasure& nu);

}  // namespace bary
