#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <variant>

namespace cgfa {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

/// Cholesky factor of a symmetric positive-definite matrix with its cached
/// log-determinant.
///
/// Factorization is attempted once as given and, on failure, once more after
/// adding 1e-10 times the mean diagonal entry to the diagonal. A second failure
/// raises NotPositiveDefinite.
class SpdFactor {
 public:
  static SpdFactor factorize(const Matrix& m);

  Index dim() const { return lower_.rows(); }
  double log_det() const { return log_det_; }
  bool jittered() const { return jittered_; }
  const Matrix& lower() const { return lower_; }

  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;
  /// d' M^{-1} d
  double mahalanobis(const Vector& d) const;
  Matrix reconstruct() const;

 private:
  SpdFactor(Matrix lower, bool jittered);

  Matrix lower_;
  double log_det_ = 0.0;
  bool jittered_ = false;
};

/// Log-density of N(mu, Sigma) from the squared Mahalanobis distance and
/// log|Sigma|.
inline double gaussian_logpdf_from_distance(double mahalanobis, double log_det, Index p) {
  return -0.5 * (static_cast<double>(p) * kLog2Pi + log_det + mahalanobis);
}

double gaussian_logpdf(const Vector& x, const Vector& mu, const SpdFactor& sigma);

/// Covariance of the form Lambda Lambda' + diag(Psi).
struct LowRankCov {
  Matrix loadings;      // p x q
  Vector uniquenesses;  // p, strictly positive

  Index p() const { return loadings.rows(); }
  Index q() const { return loadings.cols(); }
  Matrix dense() const;
};

/// (Lambda Lambda' + Psi)^{-1} through the Woodbury identity; only the q x q
/// inner matrix I + Lambda' Psi^{-1} Lambda is factorized.
Matrix woodbury_inverse(const LowRankCov& cov);

/// log|Lambda Lambda' + Psi| = log|I + Lambda' Psi^{-1} Lambda| + sum log Psi_j.
double woodbury_logdet(const LowRankCov& cov);

/// Woodbury factorization kept around for repeated quadratic forms.
class LowRankFactor {
 public:
  explicit LowRankFactor(const LowRankCov& cov);

  Index dim() const { return cov_.p(); }
  double log_det() const { return log_det_; }
  const LowRankCov& cov() const { return cov_; }

  double mahalanobis(const Vector& d) const;
  Matrix inverse() const;
  /// (Lambda Lambda' + Psi)^{-1} Lambda
  Matrix inverse_times_loadings() const;

 private:
  LowRankCov cov_;
  Vector psi_inv_;
  Matrix psi_inv_loadings_;  // Psi^{-1} Lambda
  Eigen::LLT<Matrix> inner_;
  double log_det_ = 0.0;
};

/// A covariance factorized either densely or through its low-rank structure.
class CovFactor {
 public:
  explicit CovFactor(SpdFactor dense) : impl_(std::move(dense)) {}
  explicit CovFactor(LowRankFactor low_rank) : impl_(std::move(low_rank)) {}

  static CovFactor dense(const Matrix& sigma) { return CovFactor(SpdFactor::factorize(sigma)); }
  static CovFactor low_rank(const LowRankCov& cov) { return CovFactor(LowRankFactor(cov)); }

  Index dim() const;
  double log_det() const;
  double mahalanobis(const Vector& d) const;

 private:
  std::variant<SpdFactor, LowRankFactor> impl_;
};

/// Feasible region for the contamination pair (alpha, eta): alpha in
/// (alpha_min, 1) and eta in (eta_min, eta_max).
struct ContaminationBox {
  double alpha_min = 0.5;
  double eta_min = 1.0 + 1e-6;
  double eta_max = 1000.0;

  void validate() const;
  bool contains(double alpha, double eta) const;
};

struct BoxedPoint2 {
  double alpha = 0.0;
  double eta = 0.0;
};

struct NelderMeadOptions {
  /// Stop once the spread of simplex values is below tol * (|best| + tol).
  double tol = 1e-8;
  int max_evals = 500;
};

struct NelderMeadResult {
  BoxedPoint2 point;
  double value = 0.0;
  double start_value = 0.0;
  int evaluations = 0;
};

using BoxedObjective = std::function<double(const BoxedPoint2&)>;

/// Maximizes f over the open box by running an unconstrained Nelder-Mead
/// simplex on logit-transformed coordinates.
NelderMeadResult nelder_mead_maximize(const BoxedObjective& f, const BoxedPoint2& start,
                                      const ContaminationBox& box,
                                      const NelderMeadOptions& options = {});

/// Upper-tail probability of the chi-square distribution with df degrees of
/// freedom, P(X > x).
double chi2_sf(double x, int df);

/// Regularized upper incomplete gamma function Q(a, x).
double regularized_gamma_q(double a, double x);

/// log(exp(a) + exp(b)) without overflow.
inline double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

}  // namespace cgfa
