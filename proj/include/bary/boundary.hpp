#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bary/models.hpp"

namespace bary {

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int count, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

/// Product quadrature on the unit sphere S^{m} of R^{m+1}, m >= 1, in
/// spherical angles: Gauss-Legendre in each polar angle (in the angle itself,
/// with the sin^k Jacobian folded into the weights) and the periodic
/// trapezoidal rule in the azimuth. Weights sum to the round volume
/// omega_m up to quadrature error.
class SphereGrid {
 public:
  /// counts: m - 1 polar node counts followed by the azimuthal count.
  static std::shared_ptr<const SphereGrid> make(int sphere_dim, const std::vector<int>& counts);
  /// Grammar "gl:<k1>x<k2>...", exactly sphere_dim counts.
  static std::shared_ptr<const SphereGrid> parse(const std::string& spec, int sphere_dim);
  /// Default grid for the boundary of H^n.
  static std::shared_ptr<const SphereGrid> default_for(int hyperbolic_dim);
  static std::string default_spec(int hyperbolic_dim);

  int sphere_dim() const { return sphere_dim_; }
  /// Dimension n of the hyperbolic space whose boundary this is.
  int hyperbolic_dim() const { return sphere_dim_ + 1; }
  std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }
  /// Unit node directions, one per column (n x N).
  const Eigen::MatrixXd& directions() const { return directions_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const std::vector<int>& counts() const { return counts_; }
  std::string spec() const;
  /// Ideal point xi = (1, s_j) of H^n for node j.
  BoundaryPoint node(std::size_t j) const;

  bool operator==(const SphereGrid& other) const { return sphere_dim_ == other.sphere_dim_ && counts_ == other.counts_; }

 private:
  SphereGrid() = default;
  int sphere_dim_ = 0;
  std::vector<int> counts_;
  Eigen::MatrixXd directions_;
  Eigen::VectorXd weights_;
};

using GridPtr = std::shared_ptr<const SphereGrid>;

/// Finite measure on the boundary sphere, represented by a strictly positive
/// density (relative to the round measure) at the grid nodes. Integrals are
/// sum_j f(s_j) density_j w_j.
class BoundaryMeasure {
 public:
  /// Throws ArgumentError unless density has one positive finite entry per node.
  BoundaryMeasure(GridPtr grid, Eigen::VectorXd density);

  const GridPtr& grid() const { return grid_; }
  const Eigen::VectorXd& density() const { return density_; }
  /// density_j * w_j.
  const Eigen::VectorXd& node_mass() const { return node_mass_; }
  double mass() const { return mass_; }
  double min_density() const { return density_.minCoeff(); }
  /// Euclidean mean of the node directions, sum s_j density_j w_j.
  Eigen::VectorXd mean_direction() const;

 private:
  GridPtr grid_;
  Eigen::VectorXd density_;
  Eigen::VectorXd node_mass_;
  double mass_;
};

/// Volume entropy h of the space; n - 1 for H^n.
double volume_entropy(const ModelSpace& space);

/// Uniform probability measure: the visual measure at the basepoint O.
BoundaryMeasure uniform_measure(const GridPtr& grid);

/// Normalized visual (Patterson-Sullivan) measure nu_x on the boundary of
/// H^n: density proportional to exp(-h B(x, theta)), h = n - 1, normalized
/// to unit mass by the quadrature itself. UnsupportedSpaceError unless the
/// space is a pure H^n matching the grid.
BoundaryMeasure visual_measure(const ModelSpace& space, const GridPtr& grid, const Point& x);

/// |sum_j exp(-h B(x,s_j)) w_j / omega_{n-1} - 1|: how far the quadrature is
/// from the exact unit mass of the continuum visual measure.
double visual_mass_error(const ModelSpace& space, const GridPtr& grid, const Point& x);

/// sum_i a_i^2 measure_i. Requires a_i >= 0 with sum a_i^2 = 1 (1e-12) and a
/// common grid.
BoundaryMeasure combine(const Eigen::VectorXd& a, const std::vector<BoundaryMeasure>& measures);

/// Quadrature integral of f against the measure. NumericError if f is not
/// finite at some node.
double integrate(const std::function<double(const BoundaryPoint&)>& f, const BoundaryMeasure& nu);

/// Same, with f taking the node direction s in R^n.
double integrate_directions(const std::function<double(const Eigen::VectorXd&)>& f, const BoundaryMeasure& nu);

}  // namespace bary
