#include "cgfa/cnfa.hpp"

#include "cgfa/convergence.hpp"
#include "cgfa/criteria.hpp"
#include "cgfa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cgfa {

namespace {

void check_rank(Index p, int q) {
  if (q < 1 || q >= p) {
    std::ostringstream msg;
    msg << "factor rank q = " << q << " must satisfy 1 <= q < p = " << p;
    fail(ErrorKind::InvalidRank, msg.str());
  }
}

std::vector<ComponentDensity> single_component(const CnfaParams& theta) {
  std::vector<ComponentDensity> c;
  c.push_back(ComponentDensity{1.0, theta.mu, CovFactor::low_rank(theta.cov()), theta.alpha, theta.eta});
  return c;
}

}  // namespace

Matrix gamma_matrix(const Matrix& loadings, const Vector& uniquenesses) {
  return LowRankFactor(LowRankCov{loadings, uniquenesses}).inverse_times_loadings();
}

SecondCycleStats second_cycle_stats(const Matrix& X, const Vector& mu, const Vector& weights,
                                    const Matrix& loadings, const Vector& uniquenesses,
                                    double divisor) {
  const Index p = X.cols();
  if (mu.size() != p || loadings.rows() != p || uniquenesses.size() != p ||
      weights.size() != X.rows()) {
    fail(ErrorKind::InvalidArgument, "second_cycle_stats: dimension mismatch");
  }
  if (!(divisor > 0.0)) fail(ErrorKind::InvalidArgument, "second_cycle_stats: divisor must be positive");
  if ((weights.array() < 0.0).any()) {
    fail(ErrorKind::InvalidArgument, "second_cycle_stats: weights must be non-negative");
  }

  SecondCycleStats out;
  const Matrix centered = X.rowwise() - mu.transpose();
  out.scatter = (centered.transpose() * weights.asDiagonal() * centered) / divisor;
  out.scatter = 0.5 * (out.scatter + out.scatter.transpose());
  out.gamma = gamma_matrix(loadings, uniquenesses);
  const Index q = loadings.cols();
  out.r = Matrix::Identity(q, q) - out.gamma.transpose() * loadings +
          out.gamma.transpose() * out.scatter * out.gamma;
  out.r = 0.5 * (out.r + out.r.transpose());
  return out;
}

SecondCycleStats second_cycle_stats(const Matrix& X, const Vector& mu, const Vector& weights,
                                    const Matrix& loadings, const Vector& uniquenesses) {
  return second_cycle_stats(X, mu, weights, loadings, uniquenesses, static_cast<double>(X.rows()));
}

LoadingsUpdate update_loadings(const SecondCycleStats& stats, const Vector& psi_floor) {
  const Index p = stats.scatter.rows();
  if (psi_floor.size() != p) fail(ErrorKind::InvalidArgument, "update_loadings: floor size mismatch");

  Eigen::LLT<Matrix> r_llt(stats.r);
  if (r_llt.info() != Eigen::Success || !stats.r.allFinite()) {
    fail(ErrorKind::SingularR, "update_loadings: R is not positive definite");
  }
  const Matrix s_gamma = stats.scatter * stats.gamma;  // p x q

  LoadingsUpdate out;
  out.loadings = r_llt.solve(s_gamma.transpose()).transpose();
  out.uniquenesses =
      stats.scatter.diagonal() - out.loadings.cwiseProduct(s_gamma).rowwise().sum();
  out.uniquenesses = out.uniquenesses.cwiseMax(psi_floor);
  return out;
}

Vector psi_floor_for(const Matrix& X) {
  const Matrix centered = X.rowwise() - X.colwise().mean();
  const Vector var = centered.array().square().colwise().sum() / static_cast<double>(X.rows());
  return (1e-6 * var.array()).max(1e-10).matrix();
}

LoadingsUpdate eigen_start(const Matrix& scatter, int q, const Vector& psi_floor) {
  const Index p = scatter.rows();
  check_rank(p, q);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(scatter);
  if (eig.info() != Eigen::Success) {
    fail(ErrorKind::NotPositiveDefinite, "eigen_start: eigen-decomposition failed");
  }
  LoadingsUpdate out;
  out.loadings.resize(p, q);
  for (int j = 0; j < q; ++j) {
    const Index col = p - 1 - j;  // eigenvalues are ascending
    out.loadings.col(j) = eig.eigenvectors().col(col) * std::sqrt(std::max(0.0, eig.eigenvalues()(col)));
  }
  out.uniquenesses = scatter.diagonal() - out.loadings.rowwise().squaredNorm();
  out.uniquenesses = out.uniquenesses.cwiseMax(psi_floor);
  return out;
}

double cnfa_loglik(const Matrix& X, const CnfaParams& theta, bool contaminated) {
  return evaluate_mixture(X, single_component(theta), contaminated).loglik();
}

std::size_t count_params_cnfa(int p, int q, bool contaminated) {
  check_rank(p, q);
  const auto pp = static_cast<std::size_t>(p);
  const auto qq = static_cast<std::size_t>(q);
  return pp + (pp * qq - qq * (qq - 1) / 2) + pp + (contaminated ? 2 : 0);
}

CnfaFitReport fit_cnfa_from(const Matrix& X, const CnfaParams& start, bool contaminated,
                            const FitConfig& cfg) {
  const Index n = X.rows();
  const Index p = X.cols();
  const int q = static_cast<int>(start.q());
  check_rank(p, q);
  if (n <= p) fail(ErrorKind::InvalidArgument, "factor analysis: need n > p");
  if (start.mu.size() != p || start.uniquenesses.size() != p) {
    fail(ErrorKind::InvalidArgument, "factor analysis: starting parameters do not match the data");
  }
  const bool update_contamination = contaminated && !cfg.freeze_contamination;
  const ContaminationBox box = cfg.box();
  if (update_contamination) {
    box.validate();
    if (!box.contains(start.alpha, start.eta)) {
      fail(ErrorKind::InvalidArgument, "factor analysis: starting (alpha, eta) outside the feasible box");
    }
  }

  const Vector floor = psi_floor_for(X);
  CnfaFitReport report;
  report.contaminated = contaminated;

  CnfaParams theta = start;
  theta.uniquenesses = theta.uniquenesses.cwiseMax(floor);
  ConvergenceMonitor monitor(cfg.epsilon);
  monitor.push(cnfa_loglik(X, theta, contaminated));
  if (cfg.record_cycles) report.cycle_trace.push_back(monitor.trace().back());
  CnfaParams best = theta;
  double best_ll = monitor.trace().back();

  Vector w = Vector::Ones(n);
  for (int it = 1; it <= cfg.max_iter; ++it) {
    // Cycle 1: mu, then (alpha, eta) on the observed likelihood with Sigma^(k).
    const LowRankFactor f(theta.cov());
    if (contaminated) {
      for (Index i = 0; i < n; ++i) {
        const double d = f.mahalanobis(X.row(i).transpose() - theta.mu);
        w(i) = cn_terms(d, f.log_det(), p, theta.alpha, theta.eta).weight(theta.eta);
      }
    }
    if (cfg.observer) {
      const Matrix wm = w;
      const Vector eta = Vector::Constant(1, theta.eta);
      cfg.observer(IterationView{it, "cycle-1", nullptr, &wm, &eta});
    }
    theta.mu = (X.transpose() * w) / w.sum();

    Vector d(n);
    for (Index i = 0; i < n; ++i) d(i) = f.mahalanobis(X.row(i).transpose() - theta.mu);
    if (update_contamination) {
      const ContaminationUpdate c = maximize_contamination(
          d, f.log_det(), p, Vector(), BoxedPoint2{theta.alpha, theta.eta}, box, cfg.nelder_mead);
      theta.alpha = c.alpha;
      theta.eta = c.eta;
    }
    if (cfg.record_cycles) report.cycle_trace.push_back(cnfa_loglik(X, theta, contaminated));

    // Cycle 2: (Lambda, Psi) with weights refreshed at mu^(k+1), Sigma^(k),
    // alpha^(k+1), eta^(k+1).
    if (contaminated) {
      for (Index i = 0; i < n; ++i) {
        w(i) = cn_terms(d(i), f.log_det(), p, theta.alpha, theta.eta).weight(theta.eta);
      }
    }
    if (cfg.observer) {
      const Matrix wm = w;
      const Vector eta = Vector::Constant(1, theta.eta);
      cfg.observer(IterationView{it, "cycle-2", nullptr, &wm, &eta});
    }
    const SecondCycleStats stats =
        second_cycle_stats(X, theta.mu, w, theta.loadings, theta.uniquenesses);
    LoadingsUpdate upd = update_loadings(stats, floor);
    theta.loadings = std::move(upd.loadings);
    theta.uniquenesses = std::move(upd.uniquenesses);

    const double ll = cnfa_loglik(X, theta, contaminated);
    monitor.push(ll);
    if (cfg.record_cycles) report.cycle_trace.push_back(ll);
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

  const MixtureEvaluation ev = evaluate_mixture(X, single_component(report.params), contaminated);
  report.loglik = ev.loglik();
  report.baseline_loglik = report.loglik;
  report.weights = ev.w.col(0);
  report.good_prob = ev.good.col(0);
  report.bad_flags.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) report.bad_flags[static_cast<std::size_t>(i)] = report.good_prob(i) <= 0.5;
  report.n_params = count_params_cnfa(static_cast<int>(p), q, contaminated);
  report.bic = bic(report.loglik, report.n_params, static_cast<std::size_t>(n));
  return report;
}

CnfaFitReport fit_gfa(const Matrix& X, int q, const FitConfig& cfg) {
  check_rank(X.cols(), q);
  if (X.rows() <= X.cols()) fail(ErrorKind::InvalidArgument, "fit_gfa: need n > p");
  const ScatterUpdate mle = gaussian_mle(X);
  LoadingsUpdate init = eigen_start(mle.sigma, q, psi_floor_for(X));
  CnfaParams start{mle.mu, std::move(init.loadings), std::move(init.uniquenesses), cfg.initial_alpha,
                   cfg.initial_eta};
  return fit_cnfa_from(X, start, false, cfg);
}

CnfaFitReport fit_cnfa(const Matrix& X, int q, const FitConfig& cfg) {
  const CnfaFitReport gfa = fit_gfa(X, q, cfg);
  CnfaParams start = gfa.params;
  start.alpha = cfg.initial_alpha;
  start.eta = cfg.initial_eta;
  CnfaFitReport report = fit_cnfa_from(X, start, true, cfg);
  report.baseline_loglik = gfa.loglik;
  return report;
}

}  // namespace cgfa
