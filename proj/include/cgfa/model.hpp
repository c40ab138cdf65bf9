#pragma once

#include "cgfa/config.hpp"
#include "cgfa/numerics.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cgfa {

enum class Family { gaussian, cn, gfa, cnfa, mgfa, mcnfa };

const char* family_name(Family f) noexcept;
/// Accepts the names produced by family_name; throws InvalidArgument otherwise.
Family parse_family(std::string_view name);

bool is_contaminated(Family f) noexcept;
bool is_factor(Family f) noexcept;
bool is_mixture(Family f) noexcept;

struct ModelId {
  Family family = Family::cnfa;
  int G = 1;
  int q = 0;  // 0 for the full-covariance families

  friend bool operator==(const ModelId&, const ModelId&) = default;
};

std::string describe(const ModelId& id);

/// One component in a family-neutral form. Full-covariance families fill
/// sigma; factor families fill loadings and uniquenesses.
struct ModelComponent {
  Vector mu;
  Matrix sigma;
  Matrix loadings;
  Vector uniquenesses;
  double alpha = 1.0;
  double eta = 1.0;
};

struct Model {
  Family family = Family::cnfa;
  Vector pi;
  std::vector<ModelComponent> components;

  int G() const { return static_cast<int>(components.size()); }
  Index p() const { return components.empty() ? 0 : components.front().mu.size(); }
  int q() const;
  ModelId id() const { return ModelId{family, G(), q()}; }
};

/// Everything a fitted model implies about a data matrix.
struct ModelScoring {
  double loglik = 0.0;
  std::size_t n_params = 0;
  std::size_t n = 0;
  double bic = 0.0;
  Matrix z;
  Matrix w;
  std::vector<int> labels;
  Vector good_prob;  // under the MAP component
  std::vector<bool> bad_flags;
  Vector map_weight;  // w under the MAP component
};

std::size_t count_params(const ModelId& id, Index p);

/// Validates shapes and scores X under the model.
ModelScoring score_model(const Model& model, const Matrix& X);

/// Mixture log-density at one point and at every row of X.
double model_logpdf(const Model& model, const Vector& x);
Vector model_log_density(const Model& model, const Matrix& X);

struct FitResult {
  Model model;
  ModelScoring scoring;
  int iterations = 0;
  bool converged = true;
  std::vector<double> loglik_trace;
  double baseline_loglik = 0.0;  // Gaussian counterpart used as the start
};

/// Fits one candidate. G is ignored for the single-distribution families and q
/// for the full-covariance ones.
FitResult fit_model(const Matrix& X, const ModelId& id, const FitConfig& cfg = {});

}  // namespace cgfa
