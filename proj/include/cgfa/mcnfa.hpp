#pragma once

#include "cgfa/cnfa.hpp"
#include "cgfa/config.hpp"
#include "cgfa/numerics.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cgfa {

/// Mixture of contaminated Gaussian factor analyzers. All components share q.
struct McnfaParams {
  Vector pi;
  std::vector<CnfaParams> components;

  int g() const { return static_cast<int>(components.size()); }
  Index p() const { return components.empty() ? 0 : components.front().p(); }
  Index q() const { return components.empty() ? 0 : components.front().q(); }
};

struct MixtureFitReport {
  McnfaParams params;
  bool contaminated = true;

  std::vector<double> loglik_trace;
  std::vector<double> cycle_trace;  // filled when FitConfig::record_cycles
  int iterations = 0;
  bool converged = false;

  Matrix z;  // n x G
  Matrix w;  // n x G
  std::vector<int> labels;
  Vector good_prob;  // under the MAP component
  std::vector<bool> bad_flags;

  double loglik = 0.0;
  double baseline_loglik = 0.0;  // Gaussian mixture that seeded this fit
  std::size_t n_params = 0;
  double bic = 0.0;
};

Matrix estep_responsibilities(const Matrix& X, const McnfaParams& theta, bool contaminated = true);
Matrix estep_weights(const Matrix& X, const McnfaParams& theta);

struct MixtureLocation {
  Vector pi;
  std::vector<Vector> mu;
};

/// pi_g = n_g / n and the doubly weighted means. Throws EmptyComponent when
/// n_g < q + 1 or pi_g < 1/n.
MixtureLocation cycle1_update(const Matrix& X, const Matrix& z, const Matrix& w, int q);

/// Per-component (alpha_g, eta_g) by Nelder-Mead on sum_i z_ig log p_CN(x_i).
std::vector<BoxedPoint2> cycle2_update(const Matrix& X, const Matrix& z, const McnfaParams& theta,
                                       const FitConfig& cfg = {});

/// Per-component (Lambda_g, Psi_g) from scatter matrices weighted by z_ig w_ig
/// with divisor n_g.
std::vector<LoadingsUpdate> cycle3_update(const Matrix& X, const Matrix& z, const Matrix& w,
                                          const McnfaParams& theta, const Vector& psi_floor);

/// Best-of-restarts Lloyd k-means with k-means++ seeding on columns scaled to
/// unit variance. Returns one label in [0, G) per row.
std::vector<int> kmeans_init(const Matrix& X, int G, int restarts, std::uint64_t seed);

/// Gaussian mixture of factor analyzers started from k-means.
MixtureFitReport fit_mgfa(const Matrix& X, int G, int q, const FitConfig& cfg = {});

/// Three-cycle AECM started from fit_mgfa.
MixtureFitReport fit_mcnfa(const Matrix& X, int G, int q, const FitConfig& cfg = {});

/// Three-cycle AECM from explicit starting parameters.
MixtureFitReport fit_mcnfa_from(const Matrix& X, const McnfaParams& start, bool contaminated,
                                const FitConfig& cfg = {});

double mixture_loglik(const Matrix& X, const McnfaParams& theta, bool contaminated);

std::size_t count_params_mcnfa(int G, int p, int q, bool contaminated = true);

/// Fills z, w, labels, good_prob, bad_flags, loglik, n_params and bic of a
/// report from its parameters.
void classify(const Matrix& X, MixtureFitReport& report);

}  // namespace cgfa
