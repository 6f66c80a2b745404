#include "bary/volbounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bary/errors.hpp"
#include "bary/parallel.hpp"

namespace bary {

double sphere_volume(int n) {
  if (n < 1) throw ArgumentError("sphere_volume: n must be >= 1");
  const double h = 0.5 * (n + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

double simplex_volume(int n) { return sphere_volume(n) / std::ldexp(1.0, n + 1); }

BoundReport simplicial_lower_bound(int n, double integral_un) {
  if (n < 3) throw ArgumentError("simplicial_lower_bound: n must be >= 3");
  if (!(integral_un >= 0.0) || !std::isfinite(integral_un))
    throw ArgumentError("simplicial_lower_bound: integral of u^n must be finite and nonnegative");
  BoundReport r;
  r.n = n;
  r.integralUn = integral_un;
  r.omega = sphere_volume(n);
  r.nMinusOnePowN = std::pow(n - 1.0, n);
  r.nPowHalfN = std::pow(static_cast<double>(n), 0.5 * n);
  r.coefficient = 2.0 * r.nMinusOnePowN / (r.nPowHalfN * r.omega);
  r.lowerBound = r.coefficient * integral_un;
  return r;
}

double sigma_upper(int n) {
  if (n < 3) throw ArgumentError("sigma_upper: n must be >= 3");
  return std::pow(static_cast<double>(n), 0.5 * n) * sphere_volume(n) / (2.0 * std::pow(n - 1.0, n));
}

double thurston_upper(int n) {
  if (n < 3) throw ArgumentError("thurston_upper: n must be >= 3");
  return std::numbers::pi / std::tgamma(static_cast<double>(n));
}

std::vector<SigmaRow> sigma_compare(int from, int to) {
  if (from < 3 || to < from) throw ArgumentError("sigma_compare: need 3 <= from <= to");
  std::vector<SigmaRow> rows;
  for (int n = from; n <= to; ++n) {
    SigmaRow row{n, sigma_upper(n), thurston_upper(n), false};
    row.inferior = row.sigmaUpper >= row.thurstonUpper;
    rows.push_back(row);
  }
  return rows;
}

double straightening_bound(double phi_integral, double c, int n) {
  if (!(c > 0.0)) throw ArgumentError("straightening_bound: C must be positive");
  if (!(phi_integral >= 0.0)) throw ArgumentError("straightening_bound: integral must be nonnegative");
  return phi_integral / (c * simplex_volume(n));
}

int TorusField::bandwidth() const {
  int b = 0;
  for (const auto& m : x) b = std::max({b, std::abs(m.k[0]), std::abs(m.k[1])});
  for (const auto& m : phi) b = std::max({b, std::abs(m.k[0]), std::abs(m.k[1])});
  return b;
}

TorusField TorusField::gradient_of(const ScalarMode& f, std::array<double, 2> periods) {
  const double w0 = 2.0 * std::numbers::pi * f.k[0] / periods[0];
  const double w1 = 2.0 * std::numbers::pi * f.k[1] / periods[1];
  // d/dx_j (c cos a + s sin a) = w_j (s cos a - c sin a)
  VectorMode m;
  m.k = f.k;
  m.cosCoef = Eigen::Vector2d(w0 * f.sinCoef, w1 * f.sinCoef);
  m.sinCoef = Eigen::Vector2d(-w0 * f.cosCoef, -w1 * f.cosCoef);
  TorusField t;
  t.periods = periods;
  t.x.push_back(m);
  return t;
}

TorusField TorusField::random(Rng& rng, int bandwidth, int modes, double phi_amplitude,
                              std::array<double, 2> periods) {
  if (bandwidth < 1 || modes < 1) throw ArgumentError("TorusField::random: bandwidth and modes must be >= 1");
  std::uniform_int_distribution<int> freq(-bandwidth, bandwidth);
  TorusField t;
  t.periods = periods;
  for (int i = 0; i < modes; ++i) {
    VectorMode m;
    m.k = {freq(rng), freq(rng)};
    m.cosCoef = gaussian_vector(rng, 2);
    m.sinCoef = gaussian_vector(rng, 2);
    t.x.push_back(m);
  }
  if (phi_amplitude > 0.0) t.phi.push_back(ScalarMode{{1, 0}, phi_amplitude, 0.0});
  return t;
}

namespace {

struct Pointwise {
  double ric = 0.0;
  double div_sq = 0.0;
  double tr = 0.0;
};

Pointwise bochner_integrands(const TorusField& field, double x0, double x1) {
  const double tau = 2.0 * std::numbers::pi;
  Eigen::Vector2d xv = Eigen::Vector2d::Zero();
  Eigen::Matrix2d dx = Eigen::Matrix2d::Zero();  // dx(i, j) = d_j X^i
  for (const VectorMode& m : field.x) {
    const Eigen::Vector2d w(tau * m.k[0] / field.periods[0], tau * m.k[1] / field.periods[1]);
    const double a = w[0] * x0 + w[1] * x1;
    const double c = std::cos(a), s = std::sin(a);
    xv += c * m.cosCoef + s * m.sinCoef;
    dx += (c * m.sinCoef - s * m.cosCoef) * w.transpose();
  }
  double phi = 0.0, lap = 0.0;
  Eigen::Vector2d dphi = Eigen::Vector2d::Zero();
  for (const ScalarMode& m : field.phi) {
    const Eigen::Vector2d w(tau * m.k[0] / field.periods[0], tau * m.k[1] / field.periods[1]);
    const double a = w[0] * x0 + w[1] * x1;
    const double c = std::cos(a), s = std::sin(a);
    const double f = m.cosCoef * c + m.sinCoef * s;
    phi += f;
    dphi += (m.sinCoef * c - m.cosCoef * s) * w;
    lap -= w.squaredNorm() * f;
  }
  // nabla_j X^i = d_j X^i + Gamma^i_{jk} X^k with
  // Gamma^i_{jk} = delta^i_j phi_k + delta^i_k phi_j - delta_{jk} phi_i.
  Eigen::Matrix2d cov = dx;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double g = 0.0;
      for (int k = 0; k < 2; ++k)
        g += ((i == j ? dphi[k] : 0.0) + (i == k ? dphi[j] : 0.0) - (j == k ? dphi[i] : 0.0)) * xv[k];
      cov(i, j) += g;
    }
  const double vol = std::exp(2.0 * phi);
  Pointwise p;
  const double div = cov.trace();
  p.div_sq = div * div * vol;
  p.tr = (cov * cov).trace() * vol;
  // Ric(X, X) = K |X|_g^2 with K = -e^{-2 phi} lap(phi) and |X|_g^2 = e^{2 phi} |X|^2.
  p.ric = -lap * xv.squaredNorm() * vol;
  return p;
}

}  // namespace

BochnerResult bochner_check(const TorusField& field, int grid_res) {
  if (grid_res < 16) throw ArgumentError("bochner_check: gridRes must be >= 16");
  if (grid_res <= 2 * field.bandwidth())
    throw ArgumentError("bochner_check: gridRes " + std::to_string(grid_res) + " does not resolve bandwidth " +
                        std::to_string(field.bandwidth()));
  if (!(field.periods[0] > 0.0 && field.periods[1] > 0.0)) throw ArgumentError("bochner_check: periods must be positive");

  const double h0 = field.periods[0] / grid_res;
  const double h1 = field.periods[1] / grid_res;
  std::vector<Pointwise> rows(static_cast<std::size_t>(grid_res));
  parallel_for(rows.size(), [&](std::size_t r) {
    Pointwise acc;
    for (int c = 0; c < grid_res; ++c) {
      const Pointwise p = bochner_integrands(field, static_cast<double>(r) * h0, c * h1);
      acc.ric += p.ric;
      acc.div_sq += p.div_sq;
      acc.tr += p.tr;
    }
    rows[r] = acc;
  });
  BochnerResult out;
  out.gridRes = grid_res;
  for (const Pointwise& p : rows) {
    out.ricci += p.ric * h0 * h1;
    out.divergenceSq += p.div_sq * h0 * h1;
    out.traceNablaSq += p.tr * h0 * h1;
  }
  out.residual = std::abs(out.ricci - (out.divergenceSq - out.traceNablaSq));
  return out;
}

}  // namespace bary
