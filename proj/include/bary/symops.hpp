#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include <Eigen/Dense>

#include "bary/random.hpp"

namespace bary {

enum class Definiteness { Zero, PositiveDefinite, PositiveSemidefinite, NegativeSemidefinite, Indefinite };

/// Symmetric bilinear form on an n-dimensional inner product space, stored
/// in an orthonormal basis. The spectral decomposition is computed once at
/// construction; all definiteness queries go through it.
class SymOp {
 public:
  /// Relative tolerance of the definiteness certificate: an eigenvalue
  /// >= -kDefinitenessTol * spectral_radius counts as nonnegative.
  static constexpr double kDefinitenessTol = 1e-10;
  static constexpr double kSymmetryTol = 1e-12;

  /// Throws ArgumentError if `entries` is not square or not symmetric to
  /// kSymmetryTol (relative to max(1, max |entry|)).
  explicit SymOp(const Eigen::MatrixXd& entries);

  static SymOp identity(int n);
  static SymOp zero(int n);
  static SymOp diagonal(const Eigen::VectorXd& diag);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& matrix() const { return entries_; }
  double operator()(int i, int j) const { return entries_(i, j); }

  /// Eigenvalues in ascending order, with matching eigenvector columns.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
  double min_eigenvalue() const { return eigenvalues_[0]; }
  double max_eigenvalue() const { return eigenvalues_[dim() - 1]; }
  double spectral_radius() const;

  Definiteness definiteness() const { return definiteness_; }
  bool is_psd() const;
  bool is_nsd() const;
  bool is_pd() const { return definiteness_ == Definiteness::PositiveDefinite; }

  double trace() const { return entries_.trace(); }
  /// Product of eigenvalues.
  double determinant() const;
  double form(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const { return u.dot(entries_ * v); }

  SymOp operator+(const SymOp& other) const;
  SymOp operator-(const SymOp& other) const;
  SymOp operator*(double s) const;
  friend SymOp operator*(double s, const SymOp& a) { return a * s; }

 private:
  Eigen::MatrixXd entries_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  Definiteness definiteness_;
};

/// k-th trace: sum of the k eigenvalues closest to zero of a semidefinite
/// operator. For PSD operators this is the sum of the k smallest eigenvalues
/// (the infimum of Tr(A|V) over k-planes V); for NSD the sum of the k largest
/// (the supremum). Ties are harmless because only eigenvalues enter.
/// Throws ArgumentError unless 1 <= k <= dim, DefinitenessError if A is
/// indefinite.
double trace_k(const SymOp& a, int k);

/// det(H)^{1/2} / det(K). Requires equal dimensions, K positive definite and
/// H positive semidefinite.
double det_ratio(const SymOp& h, const SymOp& k);

/// n^{n/2} / (n-1)^n, the sharp bound of the determinant inequality for
/// H + K >= I, tr H = 1. Defined for n >= 3 only.
double bcg_bound(int n);

struct BcgReport {
  int dim = 0;
  double traceH = 0.0;
  double minEigHKI = 0.0;  // smallest eigenvalue of H + K - I
  double ratio = 0.0;      // det(H)^{1/2}/det(K); NaN when K is not PD
  double bound = 0.0;      // bcg_bound(dim); NaN when dim < 3
  bool hPsd = false;
  bool kPd = false;
  bool traceOne = false;
  bool sumDominatesIdentity = false;
  bool hypothesesHold = false;
  /// ratio <= bound * (1 + 1e-9); only meaningful when hypothesesHold.
  bool holds = false;
};

/// Checks the determinant-inequality hypotheses (H PSD, |tr H - 1| <= 1e-9,
/// H + K - I PSD, K PD) and compares the ratio against the bound. Never
/// throws on hypothesis failures; they are reported.
BcgReport bcg_check(const SymOp& h, const SymOp& k);

struct BcgExtremum {
  SymOp h;
  SymOp k;
  double ratio;
  int iterations;     // total ascent iterations of the winning start
  int acceptedSteps;  // accepted ascent steps of the winning start
};

struct BcgExtremizeOptions {
  int restarts = 16;
  int maxIterations = 20000;
  double gradientTol = 1e-10;
};

/// Maximizes log(det(H)^{1/2}/det(K)) over {H >= 0, tr H = 1, K > 0,
/// H + K >= I} by projected gradient ascent from seeded random starts.
/// For fixed H the optimal K is I - H (det is Loewner-monotone), so the
/// ascent runs over H alone. Throws ArgumentError for n < 3 and
/// ConvergenceErrorWith<BcgExtremum> if no start converges.
BcgExtremum bcg_extremize(int n, std::uint64_t seed, const BcgExtremizeOptions& options = {});

/// Single ascent run from a given trace-one PSD start.
BcgExtremum bcg_extremize_from(const SymOp& start, const BcgExtremizeOptions& options = {});

/// Random pair satisfying the determinant-inequality hypotheses: H a
/// normalized Wishart matrix of random rank >= 2 (sometimes a perturbation
/// of I/n), K = I - H + P with P = 0 or a random PSD excess.
std::pair<SymOp, SymOp> random_bcg_pair(Rng& rng, int n);

struct BcgFuzzSummary {
  int n = 0;
  int samples = 0;
  std::uint64_t seed = 0;
  double maxRatio = 0.0;
  double bound = 0.0;
  double maxTightness = 0.0;  // max ratio / bound
};

/// Checks ratio <= bcg_bound(n) (1 + 1e-9) on `samples` seeded random pairs.
/// Throws PropertyFailure (sample serialized with its H and K) on the first
/// violation, ArgumentError for n < 3.
BcgFuzzSummary bcg_fuzz(int n, int samples, std::uint64_t seed);

/// n = 2 family H = diag(1 - eps, eps), K = I - H, which satisfies every
/// hypothesis while det(H)^{1/2}/det(K) = (eps (1 - eps))^{-1/2} grows
/// without bound.
double bcg_two_dim_ratio(double eps);

}  // namespace bary
