#include "bary/boundary.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "bary/busemann.hpp"
#include "bary/errors.hpp"

namespace bary {

void gauss_legendre(int count, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  if (count < 1) throw ArgumentError("gauss_legendre: count must be >= 1");
  nodes.resize(count);
  weights.resize(count);
  const int half = (count + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= count; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (count == 1) p0 = 1.0;
      // p1 = P_count(z), p0 = P_{count-1}(z)
      dp = count * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= count; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = count == 1 ? 1.0 : count * (z * p1 - p0) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    nodes[i] = -z;
    nodes[count - 1 - i] = z;
    weights[i] = w;
    weights[count - 1 - i] = w;
  }
}

std::shared_ptr<const SphereGrid> SphereGrid::make(int sphere_dim, const std::vector<int>& counts) {
  if (sphere_dim < 1) throw ArgumentError("SphereGrid: sphere dimension must be >= 1");
  if (static_cast<int>(counts.size()) != sphere_dim)
    throw ArgumentError("SphereGrid: expected " + std::to_string(sphere_dim) + " node counts");
  for (int c : counts)
    if (c < 1) throw ArgumentError("SphereGrid: node counts must be positive");
  const int m = sphere_dim;
  const int polar = m - 1;
  const int azimuth = counts.back();

  std::vector<Eigen::VectorXd> theta(polar), theta_w(polar);
  for (int j = 0; j < polar; ++j) {
    Eigen::VectorXd t, w;
    gauss_legendre(counts[j], t, w);
    theta[j] = 0.5 * std::numbers::pi * (t.array() + 1.0);
    // Jacobian sin^{m-1-j}(theta_j) (0-based j) folded into the weights.
    theta_w[j] = 0.5 * std::numbers::pi * w.array() * theta[j].array().sin().pow(m - 1 - j);
  }

  std::size_t total = static_cast<std::size_t>(azimuth);
  for (int j = 0; j < polar; ++j) total *= static_cast<std::size_t>(counts[j]);

  std::shared_ptr<SphereGrid> g(new SphereGrid());
  g->sphere_dim_ = m;
  g->counts_ = counts;
  g->directions_.resize(m + 1, static_cast<Eigen::Index>(total));
  g->weights_.resize(static_cast<Eigen::Index>(total));

  std::vector<int> idx(polar, 0);
  std::size_t col = 0;
  const double dphi = 2.0 * std::numbers::pi / azimuth;
  for (;;) {
    double w = dphi;
    double sin_prod = 1.0;
    Eigen::VectorXd s(m + 1);
    for (int j = 0; j < polar; ++j) {
      const double th = theta[j][idx[j]];
      s[j] = sin_prod * std::cos(th);
      sin_prod *= std::sin(th);
      w *= theta_w[j][idx[j]];
    }
    for (int k = 0; k < azimuth; ++k) {
      const double phi = k * dphi;
      s[m - 1] = sin_prod * std::cos(phi);
      s[m] = sin_prod * std::sin(phi);
      g->directions_.col(static_cast<Eigen::Index>(col)) = s / s.norm();
      g->weights_[static_cast<Eigen::Index>(col)] = w;
      ++col;
    }
    int j = polar - 1;
    while (j >= 0 && ++idx[j] == counts[j]) idx[j--] = 0;
    if (j < 0) break;
  }
  return g;
}

std::shared_ptr<const SphereGrid> SphereGrid::parse(const std::string& spec, int sphere_dim) {
  if (spec.rfind("gl:", 0) != 0) throw ArgumentError("grid spec must start with 'gl:' (got '" + spec + "')");
  std::vector<int> counts;
  std::stringstream ss(spec.substr(3));
  std::string item;
  while (std::getline(ss, item, 'x')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw ArgumentError("grid spec: bad node count '" + item + "'");
    }
    if (used != item.size() || v < 1) throw ArgumentError("grid spec: bad node count '" + item + "'");
    counts.push_back(v);
  }
  return make(sphere_dim, counts);
}

std::string SphereGrid::default_spec(int hyperbolic_dim) {
  switch (hyperbolic_dim) {
    case 2:
      return "gl:512";
    case 3:
      return "gl:192x384";
    case 4:
      return "gl:48x48x96";
    default: {
      std::string s = "gl:";
      for (int j = 0; j < hyperbolic_dim - 1; ++j) s += (j ? "x" : "") + std::string("16");
      return s;
    }
  }
}

std::shared_ptr<const SphereGrid> SphereGrid::default_for(int hyperbolic_dim) {
  return parse(default_spec(hyperbolic_dim), hyperbolic_dim - 1);
}

std::string SphereGrid::spec() const {
  std::string s = "gl:";
  for (std::size_t j = 0; j < counts_.size(); ++j) s += (j ? "x" : "") + std::to_string(counts_[j]);
  return s;
}

BoundaryPoint SphereGrid::node(std::size_t j) const {
  const int n = sphere_dim_ + 1;
  BoundaryPoint theta{Eigen::VectorXd(n + 1), Eigen::VectorXd::Ones(1)};
  theta.coords[0] = 1.0;
  theta.coords.tail(n) = directions_.col(static_cast<Eigen::Index>(j));
  return theta;
}

BoundaryMeasure::BoundaryMeasure(GridPtr grid, Eigen::VectorXd density)
    : grid_(std::move(grid)), density_(std::move(density)) {
  if (!grid_) throw ArgumentError("BoundaryMeasure: null grid");
  if (static_cast<std::size_t>(density_.size()) != grid_->size())
    throw ArgumentError("BoundaryMeasure: one density value per node required");
  if (!density_.allFinite() || !(density_.minCoeff() > 0.0))
    throw ArgumentError("BoundaryMeasure: density must be positive and finite at every node");
  node_mass_ = density_.cwiseProduct(grid_->weights());
  mass_ = node_mass_.sum();
}

Eigen::VectorXd BoundaryMeasure::mean_direction() const { return grid_->directions() * node_mass_; }

double volume_entropy(const ModelSpace& space) {
  if (!space.is_pure_hyperbolic()) throw UnsupportedSpaceError("volume entropy is only tabulated for H^n");
  return space.dim() - 1.0;
}

BoundaryMeasure uniform_measure(const GridPtr& grid) {
  const double total = grid->weights().sum();
  return BoundaryMeasure(grid, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid->size()), 1.0 / total));
}

namespace {

void require_matching(const ModelSpace& space, const GridPtr& grid) {
  if (!space.is_pure_hyperbolic())
    throw UnsupportedSpaceError("boundary measures are only constructed on pure H^n (got " + space.name() + ")");
  if (!grid || grid->hyperbolic_dim() != space.dim())
    throw ArgumentError("grid dimension does not match the space");
}

// exp(-h B(x, s_j)) at every node; with B normalized at O this is the
// Poisson kernel (x_0 - <xbar, s_j>)^{-h}.
Eigen::VectorXd visual_weights(const ModelSpace& space, const GridPtr& grid, const Point& x) {
  const double h = volume_entropy(space);
  const int n = space.dim();
  const Eigen::ArrayXd pairing =
      (x.coords[0] - (x.coords.tail(n).transpose() * grid->directions()).array()).transpose();
  if (!(pairing.minCoeff() > 0.0)) throw NumericError("visual_measure: degenerate Busemann pairing");
  return (-h * pairing.log()).exp().matrix();
}

}  // namespace

BoundaryMeasure visual_measure(const ModelSpace& space, const GridPtr& grid, const Point& x) {
  require_matching(space, grid);
  if (space.point_residual(x) > 1e-8) throw ArgumentError("visual_measure: point is off the hyperboloid");
  const Eigen::VectorXd p = visual_weights(space, grid, x);
  return BoundaryMeasure(grid, p / p.dot(grid->weights()));
}

double visual_mass_error(const ModelSpace& space, const GridPtr& grid, const Point& x) {
  require_matching(space, grid);
  const double omega = 2.0 * std::pow(std::numbers::pi, 0.5 * space.dim()) / std::tgamma(0.5 * space.dim());
  return std::abs(visual_weights(space, grid, x).dot(grid->weights()) / omega - 1.0);
}

BoundaryMeasure combine(const Eigen::VectorXd& a, const std::vector<BoundaryMeasure>& measures) {
  if (measures.empty() || a.size() != static_cast<Eigen::Index>(measures.size()))
    throw ArgumentError("combine: one weight per measure required");
  if ((a.array() < 0.0).any()) throw ArgumentError("combine: weights must be nonnegative");
  if (std::abs(a.squaredNorm() - 1.0) > 1e-12) throw ArgumentError("combine: squared weights must sum to 1");
  const GridPtr& grid = measures.front().grid();
  Eigen::VectorXd density = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid->size()));
  for (std::size_t i = 0; i < measures.size(); ++i) {
    if (measures[i].grid() != grid && !(*measures[i].grid() == *grid))
      throw ArgumentError("combine: measures live on different grids");
    const double w = a[static_cast<Eigen::Index>(i)] * a[static_cast<Eigen::Index>(i)];
    if (w != 0.0) density += w * measures[i].density();
  }
  return BoundaryMeasure(grid, density);
}

double integrate(const std::function<double(const BoundaryPoint&)>& f, const BoundaryMeasure& nu) {
  const GridPtr& grid = nu.grid();
  double sum = 0.0;
  for (std::size_t j = 0; j < grid->size(); ++j) {
    const double v = f(grid->node(j));
    if (!std::isfinite(v)) throw NumericError("integrate: integrand is not finite at node " + std::to_string(j));
    sum += v * nu.node_mass()[static_cast<Eigen::Index>(j)];
  }
  return sum;
}

double integrate_directions(const std::function<double(const Eigen::VectorXd&)>& f, const BoundaryMeasure& nu) {
  const GridPtr& grid = nu.grid();
  double sum = 0.0;
  for (std::size_t j = 0; j < grid->size(); ++j) {
    const double v = f(grid->directions().col(static_cast<Eigen::Index>(j)));
    if (!std::isfinite(v)) throw NumericError("integrate: integrand is not finite at node " + std::to_string(j));
    sum += v * nu.node_mass()[static_cast<Eigen::Index>(j)];
  }
  return sum;
}

}  // namespace bary
