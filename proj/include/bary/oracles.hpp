#pragma once

#include <functional>

#include <Eigen/Dense>

#include "bary/models.hpp"
#include "bary/random.hpp"

// Independent reference computations used to cross-check the closed forms.
// Nothing in the main library calls into this module.
namespace bary::oracle {

/// Busemann function from its defining limit d(x, c(t)) - t along the unit
/// speed ray c from O toward theta, evaluated at a single large t with the
/// differences rearranged to avoid cancellation.
double busemann_limit(const ModelSpace& space, const Point& x, const BoundaryPoint& theta, double t = 1e12);

/// Central differences of f along the frame directions (step h), through
/// the exponential map.
Eigen::VectorXd fd_gradient(const ModelSpace& space, const Point& x,
                            const std::function<double(const Point&)>& f, double h = 1e-5);

/// Second differences along geodesics, off-diagonal entries by polarization.
Eigen::MatrixXd fd_hessian(const ModelSpace& space, const Point& x, const std::function<double(const Point&)>& f,
                           double h = 1e-3);

struct KyFanResult {
  double sampled;     // best k-plane trace among the random samples
  double refined;     // after Jacobi-rotation descent from the best sample
  double worstSample; // least extreme sample, for sanity reporting
};

/// Extremal trace of the symmetric matrix a over k-planes. minimize selects
/// inf (PSD convention) versus sup (NSD). The samples are a Kac random walk
/// of Givens rotations acting on a k-frame.
KyFanResult ky_fan_brute(const Eigen::MatrixXd& a, int k, bool minimize, int samples, Rng& rng);

/// omega_n by shell integration omega_n = omega_{n-1} * int_0^pi sin^{n-1},
/// composite Simpson with `intervals` subintervals.
double shell_sphere_volume(int n, int intervals = 4000);

/// Volume of the positive orthant of S^n in spherical angles, Simpson.
double orthant_volume(int n, int intervals = 4000);

/// Number of independent normal Jacobi fields along exp(t v), t in [0, T],
/// that stay parallel: the solution with J(0) = e, J'(0) = 0 is compared
/// against the constant field.
int parallel_jacobi_count(const ModelSpace& space, const Tangent& v, double T = 5.0, double tol = 1e-8);

}  // namespace bary::oracle
