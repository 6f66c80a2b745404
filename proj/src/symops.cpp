#include "bary/symops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bary/errors.hpp"
#include "bary/random.hpp"
#include "bary/serialize.hpp"

namespace bary {

namespace {

Definiteness classify(const Eigen::VectorXd& eig) {
  const double radius = std::max(std::abs(eig[0]), std::abs(eig[eig.size() - 1]));
  if (radius == 0.0) return Definiteness::Zero;
  const double tol = SymOp::kDefinitenessTol * radius;
  const double lo = eig[0];
  const double hi = eig[eig.size() - 1];
  if (lo > tol) return Definiteness::PositiveDefinite;
  if (lo >= -tol) return Definiteness::PositiveSemidefinite;
  if (hi <= tol) return Definiteness::NegativeSemidefinite;
  return Definiteness::Indefinite;
}

}  // namespace

SymOp::SymOp(const Eigen::MatrixXd& entries) {
  if (entries.rows() == 0 || entries.rows() != entries.cols())
    throw ArgumentError("SymOp: entries must be a nonempty square matrix");
  if (!entries.allFinite()) throw NumericError("SymOp: non-finite entry");
  const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
  const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * scale)
    throw ArgumentError("SymOp: entries not symmetric (max asymmetry " + std::to_string(asym) + ")");
  entries_ = 0.5 * (entries + entries.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(entries_);
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
  definiteness_ = classify(eigenvalues_);
}

SymOp SymOp::identity(int n) { return SymOp(Eigen::MatrixXd::Identity(n, n)); }
SymOp SymOp::zero(int n) { return SymOp(Eigen::MatrixXd::Zero(n, n)); }
SymOp SymOp::diagonal(const Eigen::VectorXd& diag) { return SymOp(Eigen::MatrixXd(diag.asDiagonal())); }

double SymOp::spectral_radius() const {
  return std::max(std::abs(eigenvalues_[0]), std::abs(eigenvalues_[dim() - 1]));
}

bool SymOp::is_psd() const {
  return definiteness_ == Definiteness::Zero || definiteness_ == Definiteness::PositiveDefinite ||
         definiteness_ == Definiteness::PositiveSemidefinite;
}

bool SymOp::is_nsd() const {
  return definiteness_ == Definiteness::Zero || definiteness_ == Definiteness::NegativeSemidefinite;
}

double SymOp::determinant() const { return eigenvalues_.prod(); }

SymOp SymOp::operator+(const SymOp& other) const {
  if (other.dim() != dim()) throw ArgumentError("SymOp: dimension mismatch");
  return SymOp(entries_ + other.entries_);
}

SymOp SymOp::operator-(const SymOp& other) const {
  if (other.dim() != dim()) throw ArgumentError("SymOp: dimension mismatch");
  return SymOp(entries_ - other.entries_);
}

SymOp SymOp::operator*(double s) const { return SymOp(s * entries_); }

double trace_k(const SymOp& a, int k) {
  if (k < 1 || k > a.dim())
    throw ArgumentError("trace_k: k=" + std::to_string(k) + " outside [1, " + std::to_string(a.dim()) + "]");
  const Eigen::VectorXd& eig = a.eigenvalues();
  if (a.is_psd()) return eig.head(k).sum();
  if (a.is_nsd()) return eig.tail(k).sum();
  throw DefinitenessError("trace_k: operator is indefinite");
}

double det_ratio(const SymOp& h, const SymOp& k) {
  if (h.dim() != k.dim()) throw ArgumentError("det_ratio: dimension mismatch");
  if (!k.is_pd()) throw DefinitenessError("det_ratio: K is not positive definite");
  if (!h.is_psd()) throw DefinitenessError("det_ratio: H is not positive semidefinite");
  // Certified-PSD H may carry eigenvalues of order -1e-10*radius; treat as 0.
  const double det_h = h.eigenvalues().cwiseMax(0.0).prod();
  return std::sqrt(det_h) / k.determinant();
}

double bcg_bound(int n) {
  if (n < 3) throw ArgumentError("bcg_bound: defined for n >= 3 only");
  return std::pow(static_cast<double>(n), 0.5 * n) / std::pow(static_cast<double>(n - 1), n);
}

BcgReport bcg_check(const SymOp& h, const SymOp& k) {
  if (h.dim() != k.dim()) throw ArgumentError("bcg_check: dimension mismatch");
  const int n = h.dim();
  BcgReport r;
  r.dim = n;
  r.traceH = h.trace();
  const SymOp excess = h + k - SymOp::identity(n);
  r.minEigHKI = excess.min_eigenvalue();
  r.hPsd = h.is_psd();
  r.kPd = k.is_pd();
  r.traceOne = std::abs(r.traceH - 1.0) <= 1e-9;
  r.sumDominatesIdentity = excess.is_psd() || r.minEigHKI >= -SymOp::kDefinitenessTol;
  r.bound = n >= 3 ? bcg_bound(n) : std::numeric_limits<double>::quiet_NaN();
  r.ratio = (r.kPd && r.hPsd) ? det_ratio(h, k) : std::numeric_limits<double>::quiet_NaN();
  r.hypothesesHold = n >= 3 && r.hPsd && r.kPd && r.traceOne && r.sumDominatesIdentity;
  r.holds = r.hypothesesHold && r.ratio <= r.bound * (1.0 + 1e-9);
  return r;
}

namespace {

constexpr double kEigenFloor = 1e-12;

// log(det(H)^{1/2} / det(I - H)) from the spectrum of H.
double log_ratio(const Eigen::VectorXd& eig) {
  double f = 0.0;
  for (double l : eig) f += 0.5 * std::log(l) - std::log1p(-l);
  return f;
}

// Projection onto {tr = 1, H >= 0}: clip the spectrum at a small positive
// floor, then renormalize the trace.
Eigen::MatrixXd project_trace_one(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  Eigen::VectorXd eig = es.eigenvalues().cwiseMax(kEigenFloor);
  eig /= eig.sum();
  return es.eigenvectors() * eig.asDiagonal() * es.eigenvectors().transpose();
}

struct AscentOutcome {
  Eigen::MatrixXd h;
  double objective;
  int iterations;
  int accepted;
  bool converged;
};

AscentOutcome ascend(const Eigen::MatrixXd& start, const BcgExtremizeOptions& opt) {
  const int n = static_cast<int>(start.rows());
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd h = project_trace_one(start);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  double f = log_ratio(es.eigenvalues());
  double step = 1.0;
  AscentOutcome out{h, f, 0, 0, false};
  for (int it = 0; it < opt.maxIterations; ++it) {
    out.iterations = it;
    // Gradient of the objective, projected onto trace-zero directions.
    const Eigen::VectorXd& eig = es.eigenvalues();
    const Eigen::MatrixXd& vec = es.eigenvectors();
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g[i] = 0.5 / eig[i] + 1.0 / (1.0 - eig[i]);
    Eigen::MatrixXd grad = vec * g.asDiagonal() * vec.transpose();
    grad -= (grad.trace() / n) * id;
    const double gnorm2 = grad.squaredNorm();
    if (std::sqrt(gnorm2) <= opt.gradientTol) {
      out.converged = true;
      break;
    }
    bool accepted = false;
    step = std::min(1.0, 2.0 * step);
    while (step > 1e-18) {
      Eigen::MatrixXd trial = project_trace_one(h + step * grad);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> trial_es(trial);
      const double ft = log_ratio(trial_es.eigenvalues());
      if (ft >= f + 1e-4 * (grad.cwiseProduct(trial - h)).sum() && ft > f) {
        h = trial;
        es = trial_es;
        f = ft;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No ascent direction survives rounding: stationary to machine precision.
      out.converged = std::sqrt(gnorm2) <= 1e3 * opt.gradientTol;
      break;
    }
    ++out.accepted;
  }
  out.h = h;
  out.objective = f;
  return out;
}

BcgExtremum to_extremum(const AscentOutcome& a) {
  const int n = static_cast<int>(a.h.rows());
  SymOp h(a.h);
  SymOp k(Eigen::MatrixXd::Identity(n, n) - a.h);
  return BcgExtremum{h, k, std::exp(a.objective), a.iterations, a.accepted};
}

}  // namespace

BcgExtremum bcg_extremize_from(const SymOp& start, const BcgExtremizeOptions& options) {
  if (start.dim() < 3) throw ArgumentError("bcg_extremize: n >= 3 required");
  const AscentOutcome a = ascend(start.matrix(), options);
  if (!a.converged) throw ConvergenceErrorWith<BcgExtremum>("bcg_extremize: ascent did not converge", to_extremum(a));
  return to_extremum(a);
}

BcgExtremum bcg_extremize(int n, std::uint64_t seed, const BcgExtremizeOptions& options) {
  if (n < 3) throw ArgumentError("bcg_extremize: n >= 3 required");
  if (options.restarts < 1) throw ArgumentError("bcg_extremize: restarts >= 1 required");
  std::optional<AscentOutcome> best;
  std::optional<AscentOutcome> best_converged;
  for (int r = 0; r < options.restarts; ++r) {
    Rng rng = sample_rng(seed, static_cast<std::uint64_t>(r));
    const Eigen::MatrixXd g = gaussian_matrix(rng, n, n);
    const AscentOutcome a = ascend(g * g.transpose(), options);
    if (!best || a.objective > best->objective) best = a;
    if (a.converged && (!best_converged || a.objective > best_converged->objective)) best_converged = a;
  }
  if (!best_converged)
    throw ConvergenceErrorWith<BcgExtremum>("bcg_extremize: no restart converged", to_extremum(*best));
  return to_extremum(*best_converged);
}

std::pair<SymOp, SymOp> random_bcg_pair(Rng& rng, int n) {
  if (n < 2) throw ArgumentError("random_bcg_pair: n >= 2 required");
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd h;
  if (uniform01(rng) < 0.2) {
    // Near the extremizer I/n.
    const Eigen::MatrixXd g = gaussian_matrix(rng, n, n);
    h = id / n + 1e-3 * uniform01(rng) * (g + g.transpose()) / n;
  } else {
    const int rank = std::uniform_int_distribution<int>(2, n)(rng);
    const Eigen::MatrixXd g = gaussian_matrix(rng, n, rank);
    h = g * g.transpose();
  }
  h = project_trace_one(h);
  Eigen::MatrixXd k = id - h;
  if (uniform01(rng) >= 0.3) {
    const Eigen::MatrixXd w = gaussian_matrix(rng, n, std::uniform_int_distribution<int>(1, n)(rng));
    const double scale = std::pow(10.0, -6.0 * uniform01(rng));
    k += scale * w * w.transpose() / n;
  }
  return {SymOp(0.5 * (h + h.transpose())), SymOp(0.5 * (k + k.transpose()))};
}

BcgFuzzSummary bcg_fuzz(int n, int samples, std::uint64_t seed) {
  if (n < 3) throw ArgumentError("bcg_fuzz: n >= 3 required");
  if (samples < 1) throw ArgumentError("bcg_fuzz: samples >= 1 required");
  BcgFuzzSummary s;
  s.n = n;
  s.samples = samples;
  s.seed = seed;
  s.bound = bcg_bound(n);
  for (int i = 0; i < samples; ++i) {
    Rng rng = sample_rng(seed, static_cast<std::uint64_t>(i));
    const auto [h, k] = random_bcg_pair(rng, n);
    const BcgReport r = bcg_check(h, k);
    if (!r.hypothesesHold || !r.holds) {
      Json sample = to_json(r);
      sample["H"] = to_json(h);
      sample["K"] = to_json(k);
      sample["index"] = i;
      sample["seed"] = seed;
      throw PropertyFailure(std::string("bcg_fuzz sample ") + std::to_string(i) +
                                (r.hypothesesHold ? ": ratio exceeds the bound" : ": generated pair violates the hypotheses"),
                            dump_json(sample));
    }
    s.maxRatio = std::max(s.maxRatio, r.ratio);
  }
  s.maxTightness = s.maxRatio / s.bound;
  return s;
}

double bcg_two_dim_ratio(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ArgumentError("bcg_two_dim_ratio: eps must lie in (0, 1)");
  const SymOp h = SymOp::diagonal(Eigen::Vector2d(1.0 - eps, eps));
  const SymOp k = SymOp::identity(2) - h;
  return det_ratio(h, k);
}

}  // namespace bary
