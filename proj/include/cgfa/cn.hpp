#pragma once

#include "cgfa/config.hpp"
#include "cgfa/density.hpp"
#include "cgfa/numerics.hpp"

#include <cstddef>
#include <vector>

namespace cgfa {

/// Contaminated Gaussian CN(mu, Sigma, alpha, eta): with probability alpha a
/// point is N(mu, Sigma) (good), otherwise N(mu, eta Sigma) (bad).
struct CnParams {
  Vector mu;
  Matrix sigma;
  double alpha = 0.999;
  double eta = 1.001;
};

struct CnFitReport {
  CnParams params;
  std::vector<double> loglik_trace;
  int iterations = 0;
  bool converged = false;

  Vector weights;    // E[W_i | x_i], in [1/eta, 1]
  Vector good_prob;  // P(x_i good)
  std::vector<bool> bad_flags;

  double loglik = 0.0;
  double gaussian_loglik = 0.0;  // Gaussian MLE on the same data
  std::size_t n_params = 0;
  double bic = 0.0;
};

double cn_logpdf(const Vector& x, const CnParams& theta);

/// Mass function of the dichotomous scale variable W in {1, 1/eta}.
double pc_pmf(double w, double alpha, double eta);

double posterior_good(const Vector& x, const CnParams& theta);

/// E[W | x] under theta.
double estep_weight(const Vector& x, const CnParams& theta);

struct ScatterUpdate {
  Vector mu;
  Matrix sigma;
};

/// Weighted mean and weighted scatter with divisor n (not the weight total).
ScatterUpdate cm1_update(const Matrix& X, const Vector& w);

struct ContaminationUpdate {
  double alpha = 0.0;
  double eta = 0.0;
  double objective = 0.0;
  double start_objective = 0.0;
  int evaluations = 0;
};

/// Maximizes sum_i weight_i * log p_CN(x_i) over (alpha, eta) with the
/// location and scale summarized by squared Mahalanobis distances and log|Sigma|.
/// An empty weight vector means unit weights. The start is returned unchanged
/// when the search does not improve on it.
ContaminationUpdate maximize_contamination(const Vector& mahalanobis, double log_det, Index p,
                                           const Vector& weights, const BoxedPoint2& start,
                                           const ContaminationBox& box,
                                           const NelderMeadOptions& options);

/// Direct CM-step on the observed-data log-likelihood for (alpha, eta) with
/// mu and Sigma held fixed.
ContaminationUpdate cm2_update(const Matrix& X, const Vector& mu, const Matrix& sigma,
                               const BoxedPoint2& start, const FitConfig& cfg = {});

double cn_loglik(const Matrix& X, const CnParams& theta);
double gaussian_loglik(const Matrix& X, const Vector& mu, const Matrix& sigma);

/// Gaussian MLE (sample mean, scatter / n).
ScatterUpdate gaussian_mle(const Matrix& X);

/// ECME fit: E-step for the weights, CM-step 1 for (mu, Sigma), direct
/// observed-likelihood CM-step 2 for (alpha, eta). Starts from the Gaussian MLE
/// with (alpha, eta) = (cfg.initial_alpha, cfg.initial_eta) and stops on the
/// Aitken rule or after cfg.max_iter iterations.
CnFitReport fit_cn(const Matrix& X, const FitConfig& cfg = {});

std::size_t count_params_gaussian(Index p, bool contaminated);

}  // namespace cgfa
