#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "bary/models.hpp"
#include "bary/symops.hpp"

namespace bary {

/// Busemann function value, gradient and covariant Hessian at one (x, theta).
/// The Hessian is expressed in the canonical frame at x.
struct BusemannEval {
  double value;
  Tangent gradient;
  SymOp hessian;
};

/// Validates theta against the space (weights, null/unit normalization).
/// Throws ArgumentError on malformed data.
void check_boundary_point(const ModelSpace& space, const BoundaryPoint& theta);

/// Boundary point of a single hyperbolic factor (or of H^n itself), given by
/// a unit direction `s` in R^dim: xi = (1, s).
BoundaryPoint boundary_from_direction(const ModelSpace& space, const Eigen::VectorXd& s, int factor = 0);

/// Endpoint of the ray t -> exp(t v) for a unit tangent v.
BoundaryPoint boundary_toward(const ModelSpace& space, const Tangent& v);

/// Unit vector v_{x,theta} pointing from x toward theta (= -grad B).
Tangent direction_to(const ModelSpace& space, const Point& x, const BoundaryPoint& theta);

/// B(x, theta) normalized so B(O, theta) = 0, with O = space.origin().
/// On H^n: log(-<x, xi>) with <O, xi> = -1. On products: sum over factors of
/// weight * factor Busemann (Euclidean factors: -<x - O, s>).
double busemann(const ModelSpace& space, const Point& x, const BoundaryPoint& theta);

/// Same, normalized at an arbitrary basepoint p: B_p(x, theta) = B(x) - B(p).
double busemann(const ModelSpace& space, const Point& x, const BoundaryPoint& theta, const Point& basepoint);

Tangent grad_busemann(const ModelSpace& space, const Point& x, const BoundaryPoint& theta);

/// DdB in the canonical frame at x. On H^n this is g - dB (x) dB; on
/// products the weighted block sum, with zero blocks from Euclidean factors.
SymOp hess_busemann(const ModelSpace& space, const Point& x, const BoundaryPoint& theta);

BusemannEval evaluate_busemann(const ModelSpace& space, const Point& x, const BoundaryPoint& theta);

/// Frame components of grad B on H^n for the ideal point xi = (1, s), given
/// a precomputed frame^T J (dim x (dim+1)). Hot path shared with the
/// barycenter quadrature loops; returns -<x, xi> through `neg_pairing`.
Eigen::VectorXd hyperbolic_gradient_components(const Eigen::MatrixXd& frame_t_j, const Eigen::VectorXd& x,
                                               const Eigen::VectorXd& s, double& neg_pairing);

/// DdB_v: Hessian at v.base of the Busemann function of the ray along v.
SymOp busemann_hessian_along(const ModelSpace& space, const Tangent& v);

struct UOfXOptions {
  int samples = 512;
  int refineIterations = 3;
  std::uint64_t seed = 0;
};

/// u(x) = inf over unit v at x of Tr_2(DdB_v), estimated by uniform sphere
/// sampling followed by projected gradient descent from the best sample.
/// The returned value is an attained value, hence an upper bound on the
/// infimum. Requires samples >= 100.
double u_of_x(const ModelSpace& space, const Point& x, const UOfXOptions& options = {});

/// Ric_k(v, v) = Tr_k of the NSD form R(., v, v, .) (supremum over k-planes).
double ric_k(const ModelSpace& space, const Tangent& v, int k);

/// dim null(DdB_(x,theta)): eigenvalues below tol * (max eigenvalue + 1).
int rank_plus(const ModelSpace& space, const Point& x, const BoundaryPoint& theta, double tol = 1e-8);

/// (Tr_2 DdB > 1e-8) == (rank_plus == 1).
bool tr2_rank_equivalence(const ModelSpace& space, const Point& x, const BoundaryPoint& theta);

/// Random boundary point: uniform direction per factor, random unit weights
/// (single factor with probability `single_factor_prob`).
BoundaryPoint random_boundary_point(const ModelSpace& space, Rng& rng, double single_factor_prob = 0.25);

}  // namespace bary
