#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bary/random.hpp"
#include "bary/symops.hpp"

namespace bary {

enum class FactorKind { Hyperbolic, Euclidean };

/// One factor of a model space: H^dim (hyperboloid in R^{dim,1}) or R^dim.
struct Factor {
  FactorKind kind;
  int dim;

  int ambient_dim() const { return kind == FactorKind::Hyperbolic ? dim + 1 : dim; }
  double curvature() const { return kind == FactorKind::Hyperbolic ? -1.0 : 0.0; }
  bool operator==(const Factor&) const = default;
};

/// Point of a model space in ambient coordinates. Hyperbolic factors use
/// Minkowski coordinates with <x,x> = -1, x_0 > 0; Euclidean factors use
/// Cartesian coordinates.
struct Point {
  Eigen::VectorXd coords;
};

/// Tangent vector in ambient coordinates; hyperbolic components are
/// Minkowski-orthogonal to the basepoint.
struct Tangent {
  Point base;
  Eigen::VectorXd coords;
};

/// Ideal boundary point of a (product of) model space(s). Each factor with
/// positive weight carries either a future null vector xi with <O,xi> = -1
/// (hyperbolic) or a unit direction (Euclidean). Weights are nonnegative with
/// unit Euclidean norm: the point is the endpoint of a ray whose unit speed
/// splits across the factors with these weights.
struct BoundaryPoint {
  Eigen::VectorXd coords;
  Eigen::VectorXd weights;
};

/// Affine isometry acting factorwise: orthochronous Lorentz matrices on
/// hyperbolic factors, rigid motions on Euclidean ones. Factor swaps are
/// not representable.
struct Isometry {
  Eigen::MatrixXd linear;
  Eigen::VectorXd translation;
};

/// Concrete Hadamard model spaces with closed-form geometry: H^n, finite
/// products of hyperbolic and Euclidean factors, and flat tori (the latter
/// only carry the flat structure used by the Bochner verifier).
///
/// Tangent spaces carry a canonical orthonormal frame, the parallel transport
/// of the standard frame at the basepoint O along the geodesic O -> x. All
/// SymOps returned by the geometry layer are expressed in that frame.
class ModelSpace {
 public:
  enum class Variant { Hyperbolic, Product, FlatTorus };

  static ModelSpace hyperbolic(int n);
  /// Requires >= 2 factors and total dimension >= 2.
  static ModelSpace product(std::vector<Factor> factors);
  static ModelSpace flat_torus(std::vector<double> periods);

  Variant variant() const { return variant_; }
  const std::vector<Factor>& factors() const { return factors_; }
  const std::vector<double>& periods() const { return periods_; }
  int dim() const { return dim_; }
  int ambient_dim() const { return ambient_dim_; }
  bool is_pure_hyperbolic() const { return variant_ == Variant::Hyperbolic; }
  int factor_ambient_offset(int i) const { return ambient_offsets_[i]; }
  int factor_tangent_offset(int i) const { return tangent_offsets_[i]; }
  /// Canonical name, e.g. "H3", "H2xR", "H2xH2", "T2:1,1".
  std::string name() const;
  bool operator==(const ModelSpace& other) const;

  // Bilinear structure.
  /// Ambient form: Minkowski on hyperbolic factors, Euclidean otherwise.
  double ambient_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  double inner(const Tangent& u, const Tangent& v) const;
  double norm(const Tangent& u) const;

  // Points and tangents.
  Point origin() const;
  /// Scale-free residuals of the point / tangent constraints (max over
  /// factors): |x_0 - sqrt(1 + |x_s|^2)| / x_0 and |<x, w>| / (|x| |w|).
  double point_residual(const Point& x) const;
  double tangent_residual(const Tangent& w) const;
  /// Moves hyperbolic factors back onto the hyperboloid by resetting
  /// x_0 = sqrt(1 + |x_s|^2).
  Point reproject(const Point& x) const;
  /// Removes the normal component of hyperbolic factors.
  Tangent project_tangent(const Point& x, const Eigen::VectorXd& ambient) const;
  Tangent zero_tangent(const Point& x) const;

  /// Orthonormal frame at x as an ambient_dim x dim matrix of columns.
  Eigen::MatrixXd frame(const Point& x) const;
  /// Components of w in frame(w.base).
  Eigen::VectorXd components(const Tangent& w) const;
  Tangent from_components(const Point& x, const Eigen::VectorXd& c) const;

  // Geodesic calculus (closed forms per factor).
  Point exp_map(const Point& x, const Tangent& w, double t = 1.0) const;
  /// Zero tangent for coincident points.
  Tangent log_map(const Point& x, const Point& y) const;
  double dist(const Point& x, const Point& y) const;
  /// Parallel transport of w along the geodesic from w.base to y.
  Tangent transport(const Tangent& w, const Point& y) const;

  // Curvature. R(u,v)w with <R(u,v)v,u> = K(u,v)(|u|^2|v|^2 - <u,v>^2).
  Tangent curvature(const Tangent& u, const Tangent& v, const Tangent& w) const;
  double curvature_form(const Tangent& u, const Tangent& v, const Tangent& w, const Tangent& z) const;
  /// Sectional curvature; ArgumentError on a degenerate plane.
  double sectional(const Tangent& u, const Tangent& v) const;
  /// The NSD form R(., v, v, .): (a, b) -> <R(a,v)v, b>, in frame(v.base).
  SymOp directional_curvature(const Tangent& v) const;
  /// Same in raw frame components (no spectral work).
  Eigen::MatrixXd directional_curvature_matrix(const Eigen::VectorXd& v_components) const;

  // Isometries.
  Point apply(const Isometry& g, const Point& x) const;
  Tangent apply(const Isometry& g, const Tangent& w) const;
  BoundaryPoint apply(const Isometry& g, const BoundaryPoint& theta) const;
  /// Max deviation of the linear part from preserving the ambient form.
  double isometry_residual(const Isometry& g) const;

  // Sampling helpers.
  /// exp_O of a uniformly oriented tangent with length uniform in [0, radius].
  Point random_point(Rng& rng, double radius) const;
  Tangent random_unit_tangent(Rng& rng, const Point& x) const;
  Tangent random_tangent(Rng& rng, const Point& x, double scale = 1.0) const;
  Isometry random_isometry(Rng& rng, double boost_radius = 1.0) const;

 private:
  ModelSpace(Variant variant, std::vector<Factor> factors, std::vector<double> periods);

  Variant variant_;
  std::vector<Factor> factors_;
  std::vector<double> periods_;
  std::vector<int> ambient_offsets_;
  std::vector<int> tangent_offsets_;
  int dim_ = 0;
  int ambient_dim_ = 0;
};

/// Minkowski form <a,b> = -a_0 b_0 + sum a_i b_i.
double minkowski(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Components of a tangent u at x on the hyperboloid in the canonical frame,
/// from the spatial parts alone: u_s - x_s <x_s, u_s> / (x_0 (1 + x_0)).
/// Avoids the cancellation in Minkowski products at points far from O.
Eigen::VectorXd hyperbolic_components(const Eigen::VectorXd& x, const Eigen::VectorXd& u);
double hyperbolic_tangent_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& u);
/// <y - x, y - x> = 4 sinh^2(d/2) for hyperboloid points, without
/// cancellation for nearby points far from O.
double hyperbolic_chord_sq(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Lorentz boost of R^{n,1} mapping the basepoint (1,0,...,0) to x.
Eigen::MatrixXd boost_to(const Eigen::VectorXd& x);

/// Unit-speed-in-parameter geodesic t -> exp_x(t v) with its velocity and
/// parallel transport along it.
class Geodesic {
 public:
  Geodesic(const ModelSpace& space, Tangent v);
  Point at(double t) const;
  Tangent velocity(double t) const;
  Tangent transport(const Tangent& w, double t) const;
  const Tangent& initial() const { return v_; }

 private:
  const ModelSpace* space_;
  Tangent v_;
};

/// Path produced by jacobi_solve: J(t_i) as tangents at gamma(t_i).
struct JacobiPath {
  std::vector<double> times;
  std::vector<Tangent> fields;
  std::vector<Tangent> derivatives;
};

/// Integrates J'' + R(J, g')g' = 0 along g(t) = exp(t v) for t in [0, T]
/// with classical RK4 in a parallel orthonormal frame; the curvature matrix
/// is re-evaluated at each stage from the transported frame.
/// v must be unit, J0 and J0dot orthogonal to v; steps >= 10.
JacobiPath jacobi_solve(const ModelSpace& space, const Tangent& v, const Tangent& j0, const Tangent& j0dot,
                        double T, int steps);

struct LyapunovEstimate {
  double lower;                    // min over the singular frame
  Eigen::VectorXd exponents;       // (1/T) log of singular values, ascending
  Eigen::MatrixXd unstableRiccati; // U(0) on v-perp
};

/// Finite-time lower Lyapunov exponent along exp(t v). The unstable Riccati
/// solution U is obtained by integrating U' = -U^2 - R from U(-T) = 0 to 0;
/// the unstable Jacobi tensor Lambda then solves Y'' = -R Y with Y(0) = I,
/// Y'(0) = U(0) up to time T. Returns min over unit u in v-perp of
/// (1/T) log |Lambda_T u|, i.e. the log of the smallest singular value (the
/// minimizing orthonormal frame is the right singular frame). T >= 10.
/// The curvature operator is taken constant in the parallel frame, which is
/// exact on the (locally symmetric) model spaces.
LyapunovEstimate lyapunov_lower(const ModelSpace& space, const Tangent& v, double T, double step = 0.01);

}  // namespace bary
