#pragma once

#include "cgfa/cn.hpp"
#include "cgfa/config.hpp"
#include "cgfa/numerics.hpp"

#include <cstddef>
#include <vector>

namespace cgfa {

/// Contaminated Gaussian factor analyzer: X ~ CN(mu, Lambda Lambda' + Psi, alpha, eta).
/// Loadings are identified only up to right-multiplication by an orthogonal
/// q x q matrix.
struct CnfaParams {
  Vector mu;
  Matrix loadings;      // p x q
  Vector uniquenesses;  // p
  double alpha = 0.999;
  double eta = 1.001;

  Index p() const { return loadings.rows(); }
  Index q() const { return loadings.cols(); }
  LowRankCov cov() const { return LowRankCov{loadings, uniquenesses}; }
  Matrix sigma() const { return cov().dense(); }
};

/// Sufficient statistics for the loadings cycle.
struct SecondCycleStats {
  Matrix scatter;  // S, p x p
  Matrix r;        // R = I - gamma' Lambda + gamma' S gamma, q x q
  Matrix gamma;    // (Lambda Lambda' + Psi)^{-1} Lambda, p x q
};

struct LoadingsUpdate {
  Matrix loadings;
  Vector uniquenesses;
};

/// (Lambda Lambda' + Psi)^{-1} Lambda via the Woodbury identity.
Matrix gamma_matrix(const Matrix& loadings, const Vector& uniquenesses);

/// S = (1/divisor) sum_i weights_i (x_i - mu)(x_i - mu)' together with R and
/// gamma from the current (Lambda, Psi).
SecondCycleStats second_cycle_stats(const Matrix& X, const Vector& mu, const Vector& weights,
                                    const Matrix& loadings, const Vector& uniquenesses,
                                    double divisor);
/// Same with divisor n.
SecondCycleStats second_cycle_stats(const Matrix& X, const Vector& mu, const Vector& weights,
                                    const Matrix& loadings, const Vector& uniquenesses);

/// Lambda_new = S gamma R^{-1}, Psi_new = diag(S - Lambda_new gamma' S), with
/// Psi_new clamped from below at psi_floor.
LoadingsUpdate update_loadings(const SecondCycleStats& stats, const Vector& psi_floor);

/// Elementwise max(1e-10, 1e-6 * variance of column j).
Vector psi_floor_for(const Matrix& X);

/// Loadings from the top-q eigenpairs of a scatter matrix (eigvec * sqrt(eigval))
/// and uniquenesses from the residual diagonal.
LoadingsUpdate eigen_start(const Matrix& scatter, int q, const Vector& psi_floor);

struct CnfaFitReport {
  CnfaParams params;
  bool contaminated = true;

  std::vector<double> loglik_trace;  // one entry per iteration, plus the start
  std::vector<double> cycle_trace;   // filled when FitConfig::record_cycles
  int iterations = 0;
  bool converged = false;

  Vector weights;
  Vector good_prob;
  std::vector<bool> bad_flags;

  double loglik = 0.0;
  double baseline_loglik = 0.0;  // Gaussian factor analyzer that seeded this fit
  std::size_t n_params = 0;
  double bic = 0.0;
};

/// Gaussian factor analysis by the same two-cycle machinery with unit weights.
CnfaFitReport fit_gfa(const Matrix& X, int q, const FitConfig& cfg = {});

/// Two-cycle AECM for the contaminated factor analyzer, started from fit_gfa.
CnfaFitReport fit_cnfa(const Matrix& X, int q, const FitConfig& cfg = {});

/// Two-cycle AECM from explicit starting parameters.
CnfaFitReport fit_cnfa_from(const Matrix& X, const CnfaParams& start, bool contaminated,
                            const FitConfig& cfg = {});

double cnfa_loglik(const Matrix& X, const CnfaParams& theta, bool contaminated);

std::size_t count_params_cnfa(int p, int q, bool contaminated);

}  // namespace cgfa
