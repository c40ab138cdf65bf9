#include "property_checks.hpp"

#include "support.hpp"

#include "cgfa/cn.hpp"
#include "cgfa/cnfa.hpp"
#include "cgfa/errors.hpp"
#include "cgfa/mcnfa.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cgfa::testing {

namespace {

constexpr double kStepTolerance = -1e-8;
constexpr double kSlack = 1e-12;

double min_step(const std::vector<double>& trace) {
  double worst = 0.0;
  for (std::size_t k = 1; k < trace.size(); ++k) worst = std::min(worst, trace[k] - trace[k - 1]);
  return worst;
}

// Collects E-step violations for the bounds property.
struct BoundsObserver {
  long checked = 0;
  long violations = 0;
  double worst_row_sum = 0.0;
  std::string first;

  IterationObserver make(const std::string& tag) {
    return [this, tag](const IterationView& v) {
      if (v.weights != nullptr && v.eta != nullptr) {
        for (Index g = 0; g < v.weights->cols(); ++g) {
          const double lo = 1.0 / (*v.eta)(g);
          for (Index i = 0; i < v.weights->rows(); ++i) {
            const double w = (*v.weights)(i, g);
            ++checked;
            if (!(w >= lo * (1.0 - kSlack) && w <= 1.0 + kSlack)) note(tag, "weight out of [1/eta, 1]");
          }
        }
      }
      if (v.responsibilities != nullptr) {
        for (Index i = 0; i < v.responsibilities->rows(); ++i) {
          const double dev = std::abs(v.responsibilities->row(i).sum() - 1.0);
          worst_row_sum = std::max(worst_row_sum, dev);
          ++checked;
          if (dev > 1e-12) note(tag, "responsibility row does not sum to 1");
        }
      }
    };
  }

  void note(const std::string& tag, const char* what) {
    if (violations++ == 0) first = tag + ": " + what;
  }
};

}  // namespace

FitSuiteResult check_fit_suite(int cn_runs, int fa_runs) {
  FitSuiteResult out;
  BoundsObserver bounds;
  double worst = 0.0;
  std::string worst_tag;
  int failures = 0;
  std::ostringstream fail_msg;

  auto record = [&](const std::string& tag, const std::vector<double>& trace) {
    const double m = min_step(trace);
    if (m < worst) {
      worst = m;
      worst_tag = tag;
    }
  };

  for (int r = 0; r < cn_runs; ++r) {
    Rng rng(1000 + static_cast<std::uint64_t>(r));
    const Index p = 2 + r % 3;
    std::uniform_real_distribution<double> ua(0.6, 0.95), ue(2.0, 20.0);
    const Matrix X = sample_cn(rng, 150, 3.0 * normal_vector(rng, p), random_spd(rng, p), ua(rng), ue(rng));
    const std::string tag = "fit_cn #" + std::to_string(r);
    FitConfig cfg;
    cfg.observer = bounds.make(tag);
    try {
      record(tag, fit_cn(X, cfg).loglik_trace);
    } catch (const Error& e) {
      if (failures++ == 0) fail_msg << tag << " threw " << e.what();
    }
  }

  for (int r = 0; r < fa_runs; ++r) {
    Rng rng(2000 + static_cast<std::uint64_t>(r));
    const Index p = 6;
    const int q = 1 + r % 2;
    std::uniform_real_distribution<double> ua(0.7, 0.95), ue(3.0, 15.0);
    const Matrix X = sample_cnfa(rng, 200, normal_vector(rng, p), normal_matrix(rng, p, q),
                                 random_positive(rng, p, 0.2, 1.0), ua(rng), ue(rng));
    const std::string tag = "fit_cnfa #" + std::to_string(r);
    FitConfig cfg;
    cfg.record_cycles = true;
    cfg.observer = bounds.make(tag);
    try {
      const CnfaFitReport rep = fit_cnfa(X, q, cfg);
      record(tag + " (iterations)", rep.loglik_trace);
      record(tag + " (cycles)", rep.cycle_trace);
    } catch (const Error& e) {
      if (failures++ == 0) fail_msg << tag << " threw " << e.what();
    }
  }

  for (int r = 0; r < fa_runs; ++r) {
    Rng rng(3000 + static_cast<std::uint64_t>(r));
    const Index p = 5;
    const int q = 1;
    std::uniform_real_distribution<double> ua(0.75, 0.95), ue(3.0, 15.0);
    Vector shift = Vector::Zero(p);
    shift(0) = 8.0;
    shift(1) = -6.0;
    const Matrix A = sample_cnfa(rng, 120, normal_vector(rng, p), normal_matrix(rng, p, q),
                                 random_positive(rng, p, 0.2, 1.0), ua(rng), ue(rng));
    const Matrix B = sample_cnfa(rng, 120, normal_vector(rng, p) + shift, normal_matrix(rng, p, q),
                                 random_positive(rng, p, 0.2, 1.0), ua(rng), ue(rng));
    Matrix X(A.rows() + B.rows(), p);
    X << A, B;
    const std::string tag = "fit_mcnfa #" + std::to_string(r);
    FitConfig cfg;
    cfg.record_cycles = true;
    cfg.seed = static_cast<std::uint64_t>(r) + 1;
    cfg.observer = bounds.make(tag);
    try {
      const MixtureFitReport rep = fit_mcnfa(X, 2, q, cfg);
      record(tag + " (iterations)", rep.loglik_trace);
      record(tag + " (cycles)", rep.cycle_trace);
    } catch (const Error& e) {
      if (failures++ == 0) fail_msg << tag << " threw " << e.what();
    }
  }

  std::ostringstream m;
  m << cn_runs << " CN + " << fa_runs << " CNFA + " << fa_runs << " MCNFA fits; smallest step " << worst;
  if (!worst_tag.empty()) m << " (" << worst_tag << ")";
  if (failures > 0) m << "; " << failures << " fits failed, first: " << fail_msg.str();
  out.monotone.ok = worst >= kStepTolerance && failures == 0;
  out.monotone.detail = m.str();

  std::ostringstream b;
  b << bounds.checked << " E-step quantities checked, " << bounds.violations << " violations, worst row-sum error "
    << bounds.worst_row_sum;
  if (!bounds.first.empty()) b << "; first: " << bounds.first;
  out.bounds.ok = bounds.violations == 0 && bounds.checked > 0;
  out.bounds.detail = b.str();
  return out;
}

CheckResult check_woodbury_vs_dense(int cases) {
  Rng rng(42);
  std::uniform_int_distribution<int> up(2, 50), uq(1, 5);
  double worst_inv = 0.0, worst_ld = 0.0;
  for (int c = 0; c < cases; ++c) {
    const Index p = up(rng);
    const Index q = std::min<Index>(uq(rng), p - 1);
    const LowRankCov cov{normal_matrix(rng, p, q), random_positive(rng, p, 0.3, 2.0)};
    const Matrix dense = cov.dense();
    const Matrix oracle_inv = dense.llt().solve(Matrix::Identity(p, p));
    const double oracle_ld = dense_logdet(dense);
    worst_inv = std::max(worst_inv, (woodbury_inverse(cov) - oracle_inv).cwiseAbs().maxCoeff());
    worst_ld = std::max(worst_ld, std::abs(woodbury_logdet(cov) - oracle_ld) / std::max(1.0, std::abs(oracle_ld)));
  }
  std::ostringstream m;
  m << cases << " cases; max |inverse error| " << worst_inv << ", max log-det error " << worst_ld;
  return {worst_inv < 1e-8 && worst_ld < 1e-8, m.str()};
}

CheckResult check_cn_normalization() {
  const std::vector<std::pair<double, double>> settings = {{0.9, 4.0}, {0.6, 16.0}, {0.999, 1.001}};
  double worst = 0.0;
  std::ostringstream m;
  for (const auto& [alpha, eta] : settings) {
    // p = 1: trapezoid rule, which is spectrally accurate for these integrands.
    {
      const double mu = 0.3, var = 1.7;
      const double half = 12.0 * std::sqrt(var * eta);
      const double h = 0.05;
      double total = 0.0;
      for (double x = mu - half; x <= mu + half; x += h) {
        total += std::exp(cn_logpdf(Vector::Constant(1, x), CnParams{Vector::Constant(1, mu),
                                                                      Matrix::Constant(1, 1, var), alpha, eta}));
      }
      worst = std::max(worst, std::abs(total * h - 1.0));
    }
    // p = 2 with a correlated scale matrix.
    {
      Vector mu(2);
      mu << -0.5, 1.0;
      Matrix sigma(2, 2);
      sigma << 1.0, 0.5, 0.5, 2.0;
      const SpdFactor good = SpdFactor::factorize(sigma);
      const double half = 12.0 * std::sqrt(2.4 * eta);
      const double h = 0.1;
      double total = 0.0;
      Vector d(2);
      for (double x = -half; x <= half; x += h) {
        for (double y = -half; y <= half; y += h) {
          d << x, y;
          total += std::exp(cn_terms(good.mahalanobis(d), good.log_det(), 2, alpha, eta).log_density());
        }
      }
      worst = std::max(worst, std::abs(total * h * h - 1.0));
    }
  }
  m << "p=1 and p=2, three (alpha, eta) settings; max |integral - 1| " << worst;
  return {worst < 1e-6, m.str()};
}

CheckResult check_fa_fixed_point(int cases) {
  Rng rng(7);
  std::uniform_int_distribution<int> up(2, 10), uq(1, 3);
  double worst = 0.0;
  for (int c = 0; c < cases; ++c) {
    const Index p = up(rng);
    const Index q = std::min<Index>(uq(rng), p - 1);
    const Matrix L = normal_matrix(rng, p, q);
    const Vector psi = random_positive(rng, p, 0.2, 2.0);
    SecondCycleStats stats;
    stats.scatter = LowRankCov{L, psi}.dense();
    stats.gamma = gamma_matrix(L, psi);
    stats.r = Matrix::Identity(q, q) - stats.gamma.transpose() * L +
              stats.gamma.transpose() * stats.scatter * stats.gamma;
    const LoadingsUpdate u = update_loadings(stats, Vector::Constant(p, 1e-10));
    worst = std::max(worst, (u.loadings * u.loadings.transpose() - L * L.transpose()).cwiseAbs().maxCoeff());
    worst = std::max(worst, (u.uniquenesses - psi).cwiseAbs().maxCoeff());
  }
  std::ostringstream m;
  m << cases << " constructed cases with Lambda Lambda' + Psi = S; max change " << worst;
  return {worst < 1e-8, m.str()};
}

CheckResult check_single_component_reductions() {
  double worst = 0.0;
  int runs = 0;
  for (int r = 0; r < 5; ++r) {
    Rng rng(500 + static_cast<std::uint64_t>(r));
    const Index p = 6;
    const int q = 1 + r % 2;
    const Matrix X = sample_cnfa(rng, 150, normal_vector(rng, p), normal_matrix(rng, p, q),
                                 random_positive(rng, p, 0.2, 1.0), 0.85, 8.0);
    const FitConfig cfg;
    worst = std::max(worst, std::abs(fit_mcnfa(X, 1, q, cfg).loglik - fit_cnfa(X, q, cfg).loglik));
    worst = std::max(worst, std::abs(fit_mgfa(X, 1, q, cfg).loglik - fit_gfa(X, q, cfg).loglik));
    runs += 2;
  }
  std::ostringstream m;
  m << runs << " paired fits (mcnfa vs cnfa, mgfa vs gfa at G=1); max log-likelihood gap " << worst;
  return {worst < 1e-6, m.str()};
}

CheckResult check_cn_recovery() {
  Rng rng(20240);
  const Vector mu = Vector::Zero(3);
  const Matrix X = sample_cn(rng, 5000, mu, Matrix::Identity(3, 3), 0.85, 9.0);
  const CnFitReport r = fit_cn(X);
  const double mu_err = (r.params.mu - mu).cwiseAbs().maxCoeff();
  const double a_err = std::abs(r.params.alpha - 0.85);
  const double e_err = std::abs(r.params.eta / 9.0 - 1.0);
  std::ostringstream m;
  m << "n=5000, p=3: |mu err|inf " << mu_err << ", alpha " << r.params.alpha << ", eta " << r.params.eta;
  return {mu_err < 0.1 && a_err < 0.07 && e_err < 0.2, m.str()};
}

CheckResult check_parameter_counts() {
  const std::size_t a = count_params_cnfa(8, 1, true);
  const std::size_t b = count_params_cnfa(8, 1, false);
  const std::size_t c = count_params_cnfa(8, 2, true);
  const std::size_t d = count_params_mcnfa(2, 7, 2);
  std::ostringstream m;
  m << "cnfa(8,1)=" << a << " gfa(8,1)=" << b << " cnfa(8,2)=" << c << " mcnfa(2,7,2)=" << d;
  return {a == 26 && b == 24 && c == 33 && d == 59, m.str()};
}

}  // namespace cgfa::testing
