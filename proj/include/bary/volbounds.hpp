#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "bary/random.hpp"

namespace bary {

/// omega_n = 2 pi^{(n+1)/2} / Gamma((n+1)/2), volume of the unit round S^n.
double sphere_volume(int n);
/// Volume of the standard spherical n-simplex (positive orthant of S^n),
/// omega_n / 2^{n+1}.
double simplex_volume(int n);

struct BoundReport {
  int n = 0;
  double integralUn = 0.0;
  double lowerBound = 0.0;
  double coefficient = 0.0;  // 2 (n-1)^n / (n^{n/2} omega_n)
  double omega = 0.0;
  double nMinusOnePowN = 0.0;
  double nPowHalfN = 0.0;
};

/// ||M|| >= 2 (n-1)^n / (n^{n/2} omega_n) * integral of u^n dV.
/// n >= 3, integralUn >= 0.
BoundReport simplicial_lower_bound(int n, double integral_un);

/// n^{n/2} omega_n / (2 (n-1)^n), n >= 3.
double sigma_upper(int n);
/// pi / (n-1)!, n >= 3.
double thurston_upper(int n);

struct SigmaRow {
  int n = 0;
  double sigmaUpper = 0.0;
  double thurstonUpper = 0.0;
  bool inferior = false;  // sigmaUpper >= thurstonUpper
};
std::vector<SigmaRow> sigma_compare(int from, int to);

/// phiIntegral / (C * simplex_volume(n)). C > 0, phiIntegral >= 0.
double straightening_bound(double phi_integral, double c, int n);

/// One real Fourier mode cos(2 pi <k, x/p>) * cosCoef + sin(2 pi <k, x/p>) * sinCoef.
struct VectorMode {
  std::array<int, 2> k{0, 0};
  Eigen::Vector2d cosCoef = Eigen::Vector2d::Zero();
  Eigen::Vector2d sinCoef = Eigen::Vector2d::Zero();
};
struct ScalarMode {
  std::array<int, 2> k{0, 0};
  double cosCoef = 0.0;
  double sinCoef = 0.0;
};

/// Band-limited smooth vector field X on the 2-torus R^2 / (p1 Z x p2 Z),
/// optionally with the conformal metric e^{2 phi} delta (phi band-limited).
/// Components of X are taken in the coordinate basis.
struct TorusField {
  std::array<double, 2> periods{1.0, 1.0};
  std::vector<VectorMode> x;
  std::vector<ScalarMode> phi;

  /// Largest |k_i| over all modes.
  int bandwidth() const;
  bool conformal() const { return !phi.empty(); }
  /// X = grad f for f = one scalar mode, flat metric.
  static TorusField gradient_of(const ScalarMode& f, std::array<double, 2> periods = {1.0, 1.0});
  /// `modes` random modes of X with |k_i| <= bandwidth and Gaussian
  /// coefficients; phi_amplitude > 0 adds phi = phi_amplitude cos(2 pi x_1 / p_1).
  static TorusField random(Rng& rng, int bandwidth, int modes, double phi_amplitude = 0.0,
                           std::array<double, 2> periods = {1.0, 1.0});
};

struct BochnerResult {
  double ricci = 0.0;          // integral of Ric(X, X) dV
  double divergenceSq = 0.0;   // integral of (div X)^2 dV
  double traceNablaSq = 0.0;   // integral of Tr(nabla X o nabla X) dV
  double residual = 0.0;       // |ricci - (divergenceSq - traceNablaSq)|
  int gridRes = 0;
};

/// Assembles the three integrands of the Bochner identity on a gridRes^2
/// periodic grid (trapezoidal rule) from the exact Fourier derivatives and
/// the Christoffel symbols of e^{2 phi} delta. ArgumentError unless
/// gridRes >= 16 and gridRes > 2 * bandwidth.
BochnerResult bochner_check(const TorusField& field, int grid_res);

}  // namespace bary
