#pragma once

#include "cgfa/numerics.hpp"

#include <vector>

namespace cgfa {

/// The two weighted log-densities making up a contaminated Gaussian at one
/// point: log(alpha phi(x; mu, Sigma)) and log((1 - alpha) phi(x; mu, eta Sigma)).
struct CnTerms {
  double log_good = 0.0;
  double log_bad = 0.0;

  double log_density() const { return log_add_exp(log_good, log_bad); }
  double posterior_good() const;
  /// E[W | x] with W in {1, 1/eta}.
  double weight(double eta) const;
};

CnTerms cn_terms(double mahalanobis, double log_det, Index p, double alpha, double eta);

/// One mixture component with its covariance already factorized.
struct ComponentDensity {
  double weight = 1.0;
  Vector mu;
  CovFactor cov;
  double alpha = 1.0;
  double eta = 1.0;
};

/// Per-point quantities for a (possibly single-component) mixture.
struct MixtureEvaluation {
  Matrix log_joint;     // n x G: log pi_g + log p_g(x_i)
  Vector log_density;   // n
  Matrix z;             // n x G responsibilities
  Matrix w;             // n x G E[W | x, component]
  Matrix good;          // n x G P(good | x, component)

  double loglik() const { return log_density.sum(); }
};

/// Evaluates every component at every row of X. With contaminated == false the
/// components are plain Gaussians: weights are 1 and every point is good.
MixtureEvaluation evaluate_mixture(const Matrix& X, const std::vector<ComponentDensity>& components,
                                   bool contaminated);

/// Row-wise squared Mahalanobis distances of X around mu.
Vector mahalanobis_rows(const Matrix& X, const Vector& mu, const CovFactor& cov);

/// Log-sum-exp of one row.
double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& row);

}  // namespace cgfa
