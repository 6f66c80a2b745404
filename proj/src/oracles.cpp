#include "bary/oracles.hpp"

#include <cmath>
#include <numbers>

#include "bary/errors.hpp"

namespace bary::oracle {

namespace {

// d(x, c(tau)) - tau for the hyperbolic ray c(tau) = (cosh tau, sinh tau s).
// -<x, c(tau)> = e^tau a with a = (x0 - <xbar,s>)/2 + e^{-2 tau} (x0 + <xbar,s>)/2.
double hyperbolic_gap(const Eigen::VectorXd& x, const Eigen::VectorXd& s, double tau) {
  const double p = x.tail(s.size()).dot(s);
  const double e2 = std::exp(-2.0 * tau);
  const double a = 0.5 * (x[0] - p) + 0.5 * e2 * (x[0] + p);
  return std::log(a + std::sqrt(std::max(0.0, a * a - e2)));
}

// |x - tau s| - tau for a Euclidean ray from the origin.
double euclidean_gap(const Eigen::VectorXd& x, const Eigen::VectorXd& s, double tau) {
  const double num = x.squaredNorm() - 2.0 * tau * x.dot(s);
  const double d = std::sqrt(std::max(0.0, num + tau * tau));
  return num / (d + tau);
}

double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
  if (intervals % 2) ++intervals;
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace

double busemann_limit(const ModelSpace& space, const Point& x, const BoundaryPoint& theta, double t) {
  const auto& factors = space.factors();
  const Eigen::VectorXd c = theta.weights / theta.weights.norm();
  double sum = 0.0;  // d(x, c(t))^2 - t^2 = sum gap_i (gap_i + 2 c_i t)
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const int off = space.factor_ambient_offset(static_cast<int>(i));
    const int m = factors[i].ambient_dim();
    const double ci = c[static_cast<Eigen::Index>(i)];
    const Eigen::VectorXd xi = x.coords.segment(off, m);
    double gap;
    if (factors[i].kind == FactorKind::Hyperbolic) {
      Eigen::VectorXd s = theta.coords.segment(off + 1, factors[i].dim);
      if (ci == 0.0) s = Eigen::VectorXd::Unit(factors[i].dim, 0);
      gap = hyperbolic_gap(xi, s, ci * t);
    } else {
      Eigen::VectorXd s = theta.coords.segment(off, m);
      if (ci == 0.0) s = Eigen::VectorXd::Unit(m, 0);
      gap = euclidean_gap(xi, s, ci * t);
    }
    sum += gap * (gap + 2.0 * ci * t);
  }
  const double d = std::sqrt(std::max(0.0, sum + t * t));
  return sum / (d + t);
}

Eigen::VectorXd fd_gradient(const ModelSpace& space, const Point& x, const std::function<double(const Point&)>& f,
                            double h) {
  const int n = space.dim();
  Eigen::VectorXd g(n);
  for (int j = 0; j < n; ++j) {
    const Tangent e = space.from_components(x, Eigen::VectorXd::Unit(n, j));
    g[j] = (f(space.exp_map(x, e, h)) - f(space.exp_map(x, e, -h))) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd fd_hessian(const ModelSpace& space, const Point& x, const std::function<double(const Point&)>& f,
                           double h) {
  const int n = space.dim();
  const double f0 = f(x);
  auto second = [&](const Eigen::VectorXd& u) {
    const Tangent w = space.from_components(x, u);
    return (f(space.exp_map(x, w, h)) - 2.0 * f0 + f(space.exp_map(x, w, -h))) / (h * h);
  };
  Eigen::MatrixXd hess(n, n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd ei = Eigen::VectorXd::Unit(n, i);
    hess(i, i) = second(ei);
    for (int j = 0; j < i; ++j) {
      const Eigen::VectorXd ej = Eigen::VectorXd::Unit(n, j);
      hess(i, j) = hess(j, i) = 0.25 * (second(ei + ej) - second(ei - ej));
    }
  }
  return hess;
}

KyFanResult ky_fan_brute(const Eigen::MatrixXd& a_in, int k, bool minimize, int samples, Rng& rng) {
  const int n = static_cast<int>(a_in.rows());
  if (k < 1 || k > n || samples < 1) throw ArgumentError("ky_fan_brute: bad k or sample count");
  const double sign = minimize ? 1.0 : -1.0;
  const Eigen::MatrixXd a = sign * a_in;
  if (k == n) {
    const double t = sign * a.trace();
    return {t, t, t};
  }

  Eigen::MatrixXd q = random_orthogonal(rng, n).leftCols(k);
  Eigen::MatrixXd m = a * q;
  double value = q.cwiseProduct(m).sum();
  double best = value, worst = value;
  Eigen::MatrixXd best_q = q;
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (int s = 1; s < samples; ++s) {
    const int i = pick(rng);
    int j = pick(rng);
    while (j == i) j = pick(rng);
    const double th = angle(rng);
    const double c = std::cos(th), sn = std::sin(th);
    const Eigen::RowVectorXd qi = q.row(i), qj = q.row(j);
    const Eigen::RowVectorXd ni = c * qi - sn * qj, nj = sn * qi + c * qj;
    q.row(i) = ni;
    q.row(j) = nj;
    if (s % 512 == 0) {
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(q);
      q = Eigen::MatrixXd(qr.householderQ()).leftCols(k);
      m = a * q;
    } else {
      m += a.col(i) * (ni - qi) + a.col(j) * (nj - qj);
    }
    value = q.cwiseProduct(m).sum();
    if (value < best) {
      best = value;
      best_q = q;
    }
    worst = std::max(worst, value);
  }

  // Jacobi rotations between the plane and its complement.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(best_q);
  Eigen::MatrixXd full = qr.householderQ();
  full.leftCols(k) = best_q;
  for (int sweep = 0; sweep < 200; ++sweep) {
    double change = 0.0;
    for (int p = 0; p < k; ++p) {
      for (int r = k; r < n; ++r) {
        const Eigen::VectorXd u = full.col(p), w = full.col(r);
        const double alpha = u.dot(a * u), beta = w.dot(a * w), gamma = u.dot(a * w);
        const double two_theta = std::atan2(-gamma, -0.5 * (alpha - beta));
        const double th = 0.5 * two_theta;
        const double after = 0.5 * (alpha + beta) + 0.5 * (alpha - beta) * std::cos(two_theta) +
                             gamma * std::sin(two_theta);
        if (after < alpha) {
          change += alpha - after;
          full.col(p) = std::cos(th) * u + std::sin(th) * w;
          full.col(r) = -std::sin(th) * u + std::cos(th) * w;
        }
      }
    }
    if (change < 1e-15) break;
  }
  // Newton polish on the Grassmannian: solve B X - X C = -G with
  // B = P^T a P, C = Q^T a Q, G = P^T a Q, then retract Q + P X.
  Eigen::MatrixXd plane = full.leftCols(k);
  double refined = plane.cwiseProduct(a * plane).sum();
  const int mc = n - k;
  for (int it = 0; it < 30; ++it) {
    Eigen::HouseholderQR<Eigen::MatrixXd> frame_qr(plane);
    const Eigen::MatrixXd frame = frame_qr.householderQ();
    const Eigen::MatrixXd perp = frame.rightCols(mc);
    const Eigen::MatrixXd bm = perp.transpose() * a * perp;
    const Eigen::MatrixXd cm = plane.transpose() * a * plane;
    const Eigen::MatrixXd gm = perp.transpose() * a * plane;
    if (gm.norm() <= 1e-15 * std::max(1.0, a.norm())) break;
    Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(mc * k, mc * k);
    for (int c = 0; c < k; ++c) {
      sys.block(c * mc, c * mc, mc, mc) += bm;
      for (int r = 0; r < k; ++r) sys.block(r * mc, c * mc, mc, mc) -= cm(c, r) * Eigen::MatrixXd::Identity(mc, mc);
    }
    const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(gm.data(), mc * k);
    const Eigen::VectorXd step = sys.fullPivLu().solve(rhs);
    if (!step.allFinite()) break;
    const Eigen::MatrixXd xm = Eigen::Map<const Eigen::MatrixXd>(step.data(), mc, k);
    bool improved = false;
    for (double scale = 1.0; scale > 1e-6; scale *= 0.5) {
      Eigen::HouseholderQR<Eigen::MatrixXd> cand_qr(plane + scale * perp * xm);
      const Eigen::MatrixXd cand = Eigen::MatrixXd(cand_qr.householderQ()).leftCols(k);
      const double v = cand.cwiseProduct(a * cand).sum();
      if (v <= refined) {
        improved = v < refined;
        plane = cand;
        refined = v;
        break;
      }
    }
    if (!improved) break;
  }
  return {sign * best, sign * refined, sign * worst};
}

double shell_sphere_volume(int n, int intervals) {
  if (n < 0) throw ArgumentError("shell_sphere_volume: n must be >= 0");
  double omega = 2.0;  // S^0
  for (int d = 1; d <= n; ++d)
    omega *= simpson([d](double t) { return std::pow(std::sin(t), d - 1); }, 0.0, std::numbers::pi, intervals);
  return omega;
}

double orthant_volume(int n, int intervals) {
  if (n < 1) throw ArgumentError("orthant_volume: n must be >= 1");
  double v = 0.5 * std::numbers::pi;
  for (int j = 1; j <= n - 1; ++j) {
    const int p = n - j;
    v *= simpson([p](double t) { return std::pow(std::sin(t), p); }, 0.0, 0.5 * std::numbers::pi, intervals);
  }
  return v;
}

int parallel_jacobi_count(const ModelSpace& space, const Tangent& v, double T, double tol) {
  const int n = space.dim();
  const Eigen::VectorXd vc = space.components(v);
  const Eigen::MatrixXd vmat = vc;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(vmat);
  const Eigen::MatrixXd perp = Eigen::MatrixXd(qr.householderQ()).rightCols(n - 1);
  const Geodesic g(space, v);
  const Tangent zero = space.zero_tangent(v.base);
  Eigen::MatrixXd deviation(n, n - 1);
  for (int j = 0; j < n - 1; ++j) {
    const Tangent e = space.from_components(v.base, perp.col(j));
    const JacobiPath path = jacobi_solve(space, v, e, zero, T, 1000);
    const Tangent moved = g.transport(e, T);
    deviation.col(j) = space.components(path.fields.back()) - space.components(moved);
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(deviation);
  int count = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] <= tol) ++count;
  return count;
}

}  // namespace bary::oracle
