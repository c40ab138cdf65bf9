#include "cgfa/cn.hpp"

#include "cgfa/convergence.hpp"
#include "cgfa/criteria.hpp"
#include "cgfa/errors.hpp"

#include <cmath>
#include <sstream>

namespace cgfa {

namespace {

void check_point(const Vector& x, const CnParams& theta) {
  if (x.size() != theta.mu.size() || theta.sigma.rows() != x.size() ||
      theta.sigma.cols() != x.size()) {
    fail(ErrorKind::InvalidArgument, "contaminated Gaussian: dimension mismatch");
  }
}

CnTerms terms_at(const Vector& x, const CnParams& theta) {
  check_point(x, theta);
  const SpdFactor f = SpdFactor::factorize(theta.sigma);
  return cn_terms(f.mahalanobis(x - theta.mu), f.log_det(), x.size(), theta.alpha, theta.eta);
}

CovFactor factor_scatter(const Matrix& sigma) {
  try {
    return CovFactor::dense(sigma);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotPositiveDefinite) throw;
    fail(ErrorKind::DegenerateScatter, "weighted scatter matrix is not positive definite");
  }
}

std::vector<ComponentDensity> single_component(const CnParams& theta) {
  std::vector<ComponentDensity> c;
  c.push_back(ComponentDensity{1.0, theta.mu, factor_scatter(theta.sigma), theta.alpha, theta.eta});
  return c;
}

}  // namespace

double cn_logpdf(const Vector& x, const CnParams& theta) { return terms_at(x, theta).log_density(); }

double pc_pmf(double w, double alpha, double eta) {
  const double inv_eta = 1.0 / eta;
  if (std::abs(w - 1.0) > 1e-12 && std::abs(w - inv_eta) > 1e-12) {
    std::ostringstream msg;
    msg << "pc_pmf: w = " << w << " is neither 1 nor 1/eta = " << inv_eta;
    fail(ErrorKind::InvalidSupport, msg.str());
  }
  const double span = 1.0 - inv_eta;
  return std::pow(alpha, (w - inv_eta) / span) * std::pow(1.0 - alpha, (1.0 - w) / span);
}

double posterior_good(const Vector& x, const CnParams& theta) {
  return terms_at(x, theta).posterior_good();
}

double estep_weight(const Vector& x, const CnParams& theta) {
  return terms_at(x, theta).weight(theta.eta);
}

ScatterUpdate cm1_update(const Matrix& X, const Vector& w) {
  const Index n = X.rows();
  if (w.size() != n) fail(ErrorKind::InvalidArgument, "cm1_update: weight count does not match rows");
  if (n < X.cols() + 1) fail(ErrorKind::InvalidArgument, "cm1_update: need n >= p + 1");
  if (!(w.array() > 0.0).all()) fail(ErrorKind::InvalidArgument, "cm1_update: weights must be positive");

  ScatterUpdate out;
  out.mu = (X.transpose() * w) / w.sum();
  const Matrix centered = X.rowwise() - out.mu.transpose();
  out.sigma = (centered.transpose() * w.asDiagonal() * centered) / static_cast<double>(n);
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose());
  factor_scatter(out.sigma);
  return out;
}

ContaminationUpdate maximize_contamination(const Vector& mahalanobis, double log_det, Index p,
                                           const Vector& weights, const BoxedPoint2& start,
                                           const ContaminationBox& box,
                                           const NelderMeadOptions& options) {
  const bool weighted = weights.size() > 0;
  if (weighted && weights.size() != mahalanobis.size()) {
    fail(ErrorKind::InvalidArgument, "maximize_contamination: weight count mismatch");
  }
  const double pd = static_cast<double>(p);
  const double base = -0.5 * (pd * kLog2Pi + log_det);

  auto objective = [&](const BoxedPoint2& pt) {
    const double log_a = std::log(pt.alpha);
    const double log_1ma = std::log1p(-pt.alpha) - 0.5 * pd * std::log(pt.eta);
    const double inv_eta = 1.0 / pt.eta;
    double total = 0.0;
    for (Index i = 0; i < mahalanobis.size(); ++i) {
      const double d = mahalanobis(i);
      const double term = base + log_add_exp(log_a - 0.5 * d, log_1ma - 0.5 * d * inv_eta);
      total += weighted ? weights(i) * term : term;
    }
    return total;
  };

  const NelderMeadResult nm = nelder_mead_maximize(objective, start, box, options);
  ContaminationUpdate out;
  out.start_objective = nm.start_value;
  out.evaluations = nm.evaluations;
  if (nm.value >= nm.start_value) {
    out.alpha = nm.point.alpha;
    out.eta = nm.point.eta;
    out.objective = nm.value;
  } else {
    out.alpha = start.alpha;
    out.eta = start.eta;
    out.objective = nm.start_value;
  }
  return out;
}

ContaminationUpdate cm2_update(const Matrix& X, const Vector& mu, const Matrix& sigma,
                               const BoxedPoint2& start, const FitConfig& cfg) {
  const CovFactor f = factor_scatter(sigma);
  const Vector d = mahalanobis_rows(X, mu, f);
  return maximize_contamination(d, f.log_det(), X.cols(), Vector(), start, cfg.box(), cfg.nelder_mead);
}

double cn_loglik(const Matrix& X, const CnParams& theta) {
  return evaluate_mixture(X, single_component(theta), true).loglik();
}

double gaussian_loglik(const Matrix& X, const Vector& mu, const Matrix& sigma) {
  CnParams theta{mu, sigma, 1.0, 1.0};
  return evaluate_mixture(X, single_component(theta), false).loglik();
}

ScatterUpdate gaussian_mle(const Matrix& X) { return cm1_update(X, Vector::Ones(X.rows())); }

std::size_t count_params_gaussian(Index p, bool contaminated) {
  const auto pp = static_cast<std::size_t>(p);
  return pp + pp * (pp + 1) / 2 + (contaminated ? 2 : 0);
}

CnFitReport fit_cn(const Matrix& X, const FitConfig& cfg) {
  const Index n = X.rows();
  const Index p = X.cols();
  if (p < 1 || n < p + 1) fail(ErrorKind::InvalidArgument, "fit_cn: need p >= 1 and n >= p + 1");
  const ContaminationBox box = cfg.box();
  box.validate();
  if (!cfg.freeze_contamination && !box.contains(cfg.initial_alpha, cfg.initial_eta)) {
    fail(ErrorKind::InvalidArgument, "fit_cn: initial (alpha, eta) lies outside the feasible box");
  }

  const ScatterUpdate mle = gaussian_mle(X);
  CnFitReport report;
  report.gaussian_loglik = gaussian_loglik(X, mle.mu, mle.sigma);

  CnParams theta{mle.mu, mle.sigma, cfg.initial_alpha, cfg.initial_eta};
  ConvergenceMonitor monitor(cfg.epsilon);
  monitor.push(cn_loglik(X, theta));
  CnParams best = theta;
  double best_ll = monitor.trace().back();

  for (int it = 1; it <= cfg.max_iter; ++it) {
    // E-step
    const CovFactor f = factor_scatter(theta.sigma);
    Vector w(n);
    for (Index i = 0; i < n; ++i) {
      const double d = f.mahalanobis(X.row(i).transpose() - theta.mu);
      w(i) = cn_terms(d, f.log_det(), p, theta.alpha, theta.eta).weight(theta.eta);
    }
    if (cfg.observer) {
      const Matrix wm = w;
      const Vector eta = Vector::Constant(1, theta.eta);
      cfg.observer(IterationView{it, "e-step", nullptr, &wm, &eta});
    }

    // CM-step 1
    ScatterUpdate s = cm1_update(X, w);
    theta.mu = std::move(s.mu);
    theta.sigma = std::move(s.sigma);

    // CM-step 2
    if (!cfg.freeze_contamination) {
      const ContaminationUpdate c =
          cm2_update(X, theta.mu, theta.sigma, BoxedPoint2{theta.alpha, theta.eta}, cfg);
      theta.alpha = c.alpha;
      theta.eta = c.eta;
    }

    const double ll = cn_loglik(X, theta);
    monitor.push(ll);
    report.iterations = it;
    if (ll >= best_ll) {
      best = theta;
      best_ll = ll;
    }
    if (monitor.converged()) {
      report.converged = true;
      break;
    }
  }

  report.params = std::move(best);
  report.loglik_trace = monitor.trace();

  const MixtureEvaluation ev = evaluate_mixture(X, single_component(report.params), true);
  report.loglik = ev.loglik();
  report.weights = ev.w.col(0);
  report.good_prob = ev.good.col(0);
  report.bad_flags.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) report.bad_flags[static_cast<std::size_t>(i)] = report.good_prob(i) <= 0.5;
  report.n_params = count_params_gaussian(p, true);
  report.bic = bic(report.loglik, report.n_params, static_cast<std::size_t>(n));
  return report;
}

}  // namespace cgfa
