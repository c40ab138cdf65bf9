#include "cgfa/mcnfa.hpp"

#include "cgfa/convergence.hpp"
#include "cgfa/criteria.hpp"
#include "cgfa/density.hpp"
#include "cgfa/errors.hpp"

#include <sstream>

namespace cgfa {

namespace {

std::vector<ComponentDensity> densities(const McnfaParams& theta) {
  std::vector<ComponentDensity> out;
  out.reserve(theta.components.size());
  for (std::size_t g = 0; g < theta.components.size(); ++g) {
    const CnfaParams& c = theta.components[g];
    out.push_back(ComponentDensity{theta.pi(static_cast<Index>(g)), c.mu,
                                   CovFactor::low_rank(c.cov()), c.alpha, c.eta});
  }
  return out;
}

MixtureEvaluation evaluate(const Matrix& X, const McnfaParams& theta, bool contaminated) {
  return evaluate_mixture(X, densities(theta), contaminated);
}

void check_shape(const Matrix& X, const McnfaParams& theta) {
  if (theta.components.empty()) fail(ErrorKind::InvalidArgument, "mixture: no components");
  if (theta.pi.size() != theta.g()) fail(ErrorKind::InvalidArgument, "mixture: pi size mismatch");
  for (const CnfaParams& c : theta.components) {
    if (c.p() != X.cols() || c.mu.size() != X.cols() || c.uniquenesses.size() != X.cols()) {
      fail(ErrorKind::InvalidArgument, "mixture: component dimension does not match data");
    }
    if (c.q() != theta.q()) fail(ErrorKind::InvalidArgument, "mixture: components must share q");
  }
}

void check_component_size(double n_g, Index n, int q, Index g) {
  if (n_g < static_cast<double>(q + 1) || n_g / static_cast<double>(n) < 1.0 / static_cast<double>(n)) {
    std::ostringstream msg;
    msg << "component " << g + 1 << " has effective size " << n_g << " (need at least " << q + 1 << ")";
    fail(ErrorKind::EmptyComponent, msg.str());
  }
}

void notify(const FitConfig& cfg, int it, const char* stage, const MixtureEvaluation& ev,
            const McnfaParams& theta) {
  if (!cfg.observer) return;
  Vector eta(theta.g());
  for (int g = 0; g < theta.g(); ++g) eta(g) = theta.components[static_cast<std::size_t>(g)].eta;
  cfg.observer(IterationView{it, stage, &ev.z, &ev.w, &eta});
}

}  // namespace

Matrix estep_responsibilities(const Matrix& X, const McnfaParams& theta, bool contaminated) {
  check_shape(X, theta);
  return evaluate(X, theta, contaminated).z;
}

Matrix estep_weights(const Matrix& X, const McnfaParams& theta) {
  check_shape(X, theta);
  return evaluate(X, theta, true).w;
}

MixtureLocation cycle1_update(const Matrix& X, const Matrix& z, const Matrix& w, int q) {
  const Index n = X.rows();
  if (z.rows() != n || w.rows() != n || z.cols() != w.cols() || z.cols() < 1) {
    fail(ErrorKind::InvalidArgument, "cycle1_update: dimension mismatch");
  }
  MixtureLocation out;
  out.pi.resize(z.cols());
  for (Index g = 0; g < z.cols(); ++g) {
    const double n_g = z.col(g).sum();
    check_component_size(n_g, n, q, g);
    out.pi(g) = n_g / static_cast<double>(n);
    const Vector zw = z.col(g).cwiseProduct(w.col(g));
    out.mu.push_back((X.transpose() * zw) / zw.sum());
  }
  return out;
}

std::vector<BoxedPoint2> cycle2_update(const Matrix& X, const Matrix& z, const McnfaParams& theta,
                                       const FitConfig& cfg) {
  check_shape(X, theta);
  if (z.rows() != X.rows() || z.cols() != theta.g()) {
    fail(ErrorKind::InvalidArgument, "cycle2_update: responsibility shape mismatch");
  }
  const ContaminationBox box = cfg.box();
  box.validate();
  std::vector<BoxedPoint2> out;
  for (int g = 0; g < theta.g(); ++g) {
    const CnfaParams& c = theta.components[static_cast<std::size_t>(g)];
    const CovFactor f = CovFactor::low_rank(c.cov());
    const Vector d = mahalanobis_rows(X, c.mu, f);
    const ContaminationUpdate u = maximize_contamination(
        d, f.log_det(), X.cols(), z.col(g), BoxedPoint2{c.alpha, c.eta}, box, cfg.nelder_mead);
    out.push_back(BoxedPoint2{u.alpha, u.eta});
  }
  return out;
}

std::vector<LoadingsUpdate> cycle3_update(const Matrix& X, const Matrix& z, const Matrix& w,
                                          const McnfaParams& theta, const Vector& psi_floor) {
  check_shape(X, theta);
  if (z.rows() != X.rows() || z.cols() != theta.g() || w.rows() != z.rows() || w.cols() != z.cols()) {
    fail(ErrorKind::InvalidArgument, "cycle3_update: dimension mismatch");
  }
  std::vector<LoadingsUpdate> out;
  for (int g = 0; g < theta.g(); ++g) {
    const CnfaParams& c = theta.components[static_cast<std::size_t>(g)];
    const double n_g = z.col(g).sum();
    check_component_size(n_g, X.rows(), static_cast<int>(theta.q()), g);
    const SecondCycleStats stats = second_cycle_stats(X, c.mu, z.col(g).cwiseProduct(w.col(g)),
                                                      c.loadings, c.uniquenesses, n_g);
    out.push_back(update_loadings(stats, psi_floor));
  }
  return out;
}

double mixture_loglik(const Matrix& X, const McnfaParams& theta, bool contaminated) {
  check_shape(X, theta);
  return evaluate(X, theta, contaminated).loglik();
}

std::size_t count_params_mcnfa(int G, int p, int q, bool contaminated) {
  if (G < 1) fail(ErrorKind::InvalidArgument, "count_params_mcnfa: G must be at least 1");
  if (q < 1 || q >= p) {
    std::ostringstream msg;
    msg << "factor rank q = " << q << " must satisfy 1 <= q < p = " << p;
    fail(ErrorKind::InvalidRank, msg.str());
  }
  const auto gg = static_cast<std::size_t>(G);
  return (gg - 1) + gg * count_params_cnfa(p, q, contaminated);
}

void classify(const Matrix& X, MixtureFitReport& report) {
  const MixtureEvaluation ev = evaluate(X, report.params, report.contaminated);
  const Index n = X.rows();
  report.z = ev.z;
  report.w = ev.w;
  report.loglik = ev.loglik();
  report.labels.assign(static_cast<std::size_t>(n), 0);
  report.good_prob.resize(n);
  report.bad_flags.assign(static_cast<std::size_t>(n), false);
  for (Index i = 0; i < n; ++i) {
    Index g = 0;
    ev.z.row(i).maxCoeff(&g);
    const auto ii = static_cast<std::size_t>(i);
    report.labels[ii] = static_cast<int>(g);
    report.good_prob(i) = ev.good(i, g);
    report.bad_flags[ii] = report.good_prob(i) <= 0.5;
  }
  report.n_params = count_params_mcnfa(report.params.g(), static_cast<int>(X.cols()),
                                       static_cast<int>(report.params.q()), report.contaminated);
  report.bic = bic(report.loglik, report.n_params, static_cast<std::size_t>(n));
}

MixtureFitReport fit_mcnfa_from(const Matrix& X, const McnfaParams& start, bool contaminated,
                                const FitConfig& cfg) {
  check_shape(X, start);
  const Index n = X.rows();
  const Index p = X.cols();
  const int q = static_cast<int>(start.q());
  if (q < 1 || q >= p) fail(ErrorKind::InvalidRank, "mixture: factor rank must satisfy 1 <= q < p");
  if (n <= p) fail(ErrorKind::InvalidArgument, "mixture: need n > p");
  const bool update_contamination = contaminated && !cfg.freeze_contamination;
  if (update_contamination) {
    const ContaminationBox box = cfg.box();
    box.validate();
    for (const CnfaParams& c : start.components) {
      if (!box.contains(c.alpha, c.eta)) {
        fail(ErrorKind::InvalidArgument, "mixture: starting (alpha, eta) outside the feasible box");
      }
    }
  }

  const Vector floor = psi_floor_for(X);
  MixtureFitReport report;
  report.contaminated = contaminated;

  McnfaParams theta = start;
  for (CnfaParams& c : theta.components) c.uniquenesses = c.uniquenesses.cwiseMax(floor);

  ConvergenceMonitor monitor(cfg.epsilon);
  monitor.push(mixture_loglik(X, theta, contaminated));
  if (cfg.record_cycles) report.cycle_trace.push_back(monitor.trace().back());
  McnfaParams best = theta;
  double best_ll = monitor.trace().back();

  for (int it = 1; it <= cfg.max_iter; ++it) {
    // Cycle 1: pi and mu from z^(k), w^(k).
    MixtureEvaluation ev = evaluate(X, theta, contaminated);
    notify(cfg, it, "cycle-1", ev, theta);
    MixtureLocation loc = cycle1_update(X, ev.z, ev.w, q);
    theta.pi = loc.pi;
    for (int g = 0; g < theta.g(); ++g) {
      theta.components[static_cast<std::size_t>(g)].mu = std::move(loc.mu[static_cast<std::size_t>(g)]);
    }
    if (cfg.record_cycles) report.cycle_trace.push_back(mixture_loglik(X, theta, contaminated));

    // Cycle 2: (alpha_g, eta_g) with z^(k+1/3).
    ev = evaluate(X, theta, contaminated);
    notify(cfg, it, "cycle-2", ev, theta);
    if (update_contamination) {
      const std::vector<BoxedPoint2> ae = cycle2_update(X, ev.z, theta, cfg);
      for (int g = 0; g < theta.g(); ++g) {
        auto& c = theta.components[static_cast<std::size_t>(g)];
        c.alpha = ae[static_cast<std::size_t>(g)].alpha;
        c.eta = ae[static_cast<std::size_t>(g)].eta;
      }
    }
    if (cfg.record_cycles) report.cycle_trace.push_back(mixture_loglik(X, theta, contaminated));

    // Cycle 3: (Lambda_g, Psi_g) with z^(k+2/3), w^(k+2/3).
    ev = evaluate(X, theta, contaminated);
    notify(cfg, it, "cycle-3", ev, theta);
    std::vector<LoadingsUpdate> upd = cycle3_update(X, ev.z, ev.w, theta, floor);
    for (int g = 0; g < theta.g(); ++g) {
      auto& c = theta.components[static_cast<std::size_t>(g)];
      c.loadings = std::move(upd[static_cast<std::size_t>(g)].loadings);
      c.uniquenesses = std::move(upd[static_cast<std::size_t>(g)].uniquenesses);
    }

    const double ll = mixture_loglik(X, theta, contaminated);
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
  classify(X, report);
  report.baseline_loglik = report.loglik;
  return report;
}

MixtureFitReport fit_mgfa(const Matrix& X, int G, int q, const FitConfig& cfg) {
  const Index n = X.rows();
  const Index p = X.cols();
  if (q < 1 || q >= p) {
    std::ostringstream msg;
    msg << "factor rank q = " << q << " must satisfy 1 <= q < p = " << p;
    fail(ErrorKind::InvalidRank, msg.str());
  }
  if (G < 1) fail(ErrorKind::InvalidArgument, "fit_mgfa: G must be at least 1");
  if (n <= p) fail(ErrorKind::InvalidArgument, "fit_mgfa: need n > p");

  const std::vector<int> labels = kmeans_init(X, G, cfg.kmeans_restarts, cfg.seed);
  Matrix z = Matrix::Zero(n, G);
  for (Index i = 0; i < n; ++i) z(i, labels[static_cast<std::size_t>(i)]) = 1.0;

  const Vector floor = psi_floor_for(X);
  McnfaParams start;
  start.pi.resize(G);
  for (int g = 0; g < G; ++g) {
    const double n_g = z.col(g).sum();
    check_component_size(n_g, n, q, g);
    start.pi(g) = n_g / static_cast<double>(n);
    const Vector mu = (X.transpose() * z.col(g)) / n_g;
    const Matrix centered = X.rowwise() - mu.transpose();
    Matrix scatter = (centered.transpose() * z.col(g).asDiagonal() * centered) / n_g;
    scatter = 0.5 * (scatter + scatter.transpose());
    LoadingsUpdate init = eigen_start(scatter, q, floor);
    start.components.push_back(CnfaParams{mu, std::move(init.loadings), std::move(init.uniquenesses),
                                          cfg.initial_alpha, cfg.initial_eta});
  }
  return fit_mcnfa_from(X, start, false, cfg);
}

MixtureFitReport fit_mcnfa(const Matrix& X, int G, int q, const FitConfig& cfg) {
  const MixtureFitReport mgfa = fit_mgfa(X, G, q, cfg);
  McnfaParams start = mgfa.params;
  for (CnfaParams& c : start.components) {
    c.alpha = cfg.initial_alpha;
    c.eta = cfg.initial_eta;
  }
  MixtureFitReport report = fit_mcnfa_from(X, start, true, cfg);
  report.baseline_loglik = mgfa.loglik;
  return report;
}

}  // namespace cgfa
