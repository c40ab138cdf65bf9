#include "cgfa/density.hpp"

#include "cgfa/errors.hpp"

#include <cmath>

namespace cgfa {

double CnTerms::posterior_good() const {
  return std::exp(log_good - log_density());
}

double CnTerms::weight(double eta) const {
  const double good = posterior_good();
  return good + (1.0 - good) / eta;
}

CnTerms cn_terms(double mahalanobis, double log_det, Index p, double alpha, double eta) {
  const double pd = static_cast<double>(p);
  const double base = -0.5 * (pd * kLog2Pi + log_det);
  CnTerms t;
  t.log_good = std::log(alpha) + base - 0.5 * mahalanobis;
  t.log_bad = std::log1p(-alpha) + base - 0.5 * pd * std::log(eta) - 0.5 * mahalanobis / eta;
  return t;
}

double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  const double m = row.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((row.array() - m).exp().sum());
}

Vector mahalanobis_rows(const Matrix& X, const Vector& mu, const CovFactor& cov) {
  Vector out(X.rows());
  for (Index i = 0; i < X.rows(); ++i) {
    out(i) = cov.mahalanobis(X.row(i).transpose() - mu);
  }
  return out;
}

MixtureEvaluation evaluate_mixture(const Matrix& X, const std::vector<ComponentDensity>& components,
                                   bool contaminated) {
  const Index n = X.rows();
  const Index p = X.cols();
  const auto G = static_cast<Index>(components.size());
  if (G == 0) fail(ErrorKind::InvalidArgument, "evaluate_mixture: no components");

  MixtureEvaluation ev;
  ev.log_joint.resize(n, G);
  ev.w.resize(n, G);
  ev.good.resize(n, G);
  for (Index g = 0; g < G; ++g) {
    const auto& c = components[static_cast<std::size_t>(g)];
    if (c.mu.size() != p || c.cov.dim() != p) {
      fail(ErrorKind::InvalidArgument, "evaluate_mixture: component dimension does not match data");
    }
    const double log_weight = std::log(c.weight);
    const double log_det = c.cov.log_det();
    for (Index i = 0; i < n; ++i) {
      const double d = c.cov.mahalanobis(X.row(i).transpose() - c.mu);
      if (contaminated) {
        const CnTerms t = cn_terms(d, log_det, p, c.alpha, c.eta);
        ev.log_joint(i, g) = log_weight + t.log_density();
        ev.good(i, g) = t.posterior_good();
        ev.w(i, g) = ev.good(i, g) + (1.0 - ev.good(i, g)) / c.eta;
      } else {
        ev.log_joint(i, g) = log_weight + gaussian_logpdf_from_distance(d, log_det, p);
        ev.good(i, g) = 1.0;
        ev.w(i, g) = 1.0;
      }
    }
  }

  ev.log_density.resize(n);
  ev.z.resize(n, G);
  for (Index i = 0; i < n; ++i) {
    const double lse = log_sum_exp(ev.log_joint.row(i));
    ev.log_density(i) = lse;
    ev.z.row(i) = (ev.log_joint.row(i).array() - lse).exp();
    // Renormalize so rows sum to one to machine precision.
    ev.z.row(i) /= ev.z.row(i).sum();
  }
  return ev;
}

}  // namespace cgfa
