#include "cgfa/numerics.hpp"

#include "cgfa/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace cgfa {

namespace {

bool try_cholesky(const Matrix& m, Matrix& lower) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) return false;
  lower = llt.matrixL();
  for (Index i = 0; i < lower.rows(); ++i) {
    const double pivot = lower(i, i);
    if (!std::isfinite(pivot) || pivot <= 0.0) return false;
  }
  return true;
}

}  // namespace

SpdFactor::SpdFactor(Matrix lower, bool jittered)
    : lower_(std::move(lower)), jittered_(jittered) {
  log_det_ = 2.0 * lower_.diagonal().array().log().sum();
}

SpdFactor SpdFactor::factorize(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    fail(ErrorKind::InvalidArgument, "spd_factorize: matrix must be square and non-empty");
  }
  if (!m.allFinite()) {
    fail(ErrorKind::NotPositiveDefinite, "spd_factorize: matrix has non-finite entries");
  }
  Matrix lower;
  if (try_cholesky(m, lower)) return SpdFactor(std::move(lower), false);

  const double mean_diag = m.diagonal().mean();
  if (mean_diag > 0.0) {
    Matrix jittered = m;
    jittered.diagonal().array() += 1e-10 * mean_diag;
    if (try_cholesky(jittered, lower)) return SpdFactor(std::move(lower), true);
  }
  fail(ErrorKind::NotPositiveDefinite, "spd_factorize: matrix is not positive definite");
}

Vector SpdFactor::solve(const Vector& b) const {
  const auto l = lower_.triangularView<Eigen::Lower>();
  return l.transpose().solve(l.solve(b));
}

Matrix SpdFactor::solve(const Matrix& b) const {
  const auto l = lower_.triangularView<Eigen::Lower>();
  return l.transpose().solve(l.solve(b));
}

double SpdFactor::mahalanobis(const Vector& d) const {
  return lower_.triangularView<Eigen::Lower>().solve(d).squaredNorm();
}

Matrix SpdFactor::reconstruct() const { return lower_ * lower_.transpose(); }

double gaussian_logpdf(const Vector& x, const Vector& mu, const SpdFactor& sigma) {
  if (x.size() != mu.size() || x.size() != sigma.dim()) {
    fail(ErrorKind::InvalidArgument, "gaussian_logpdf: dimension mismatch");
  }
  return gaussian_logpdf_from_distance(sigma.mahalanobis(x - mu), sigma.log_det(), x.size());
}

Matrix LowRankCov::dense() const {
  Matrix out = loadings * loadings.transpose();
  out.diagonal() += uniquenesses;
  return out;
}

namespace {

void check_low_rank(const LowRankCov& cov) {
  if (cov.uniquenesses.size() != cov.loadings.rows()) {
    fail(ErrorKind::InvalidArgument, "low-rank covariance: loadings and uniquenesses disagree in p");
  }
  if (cov.q() > cov.p()) {
    fail(ErrorKind::InvalidRank, "low-rank covariance: q exceeds p");
  }
  if (!(cov.uniquenesses.array() > 0.0).all() || !cov.uniquenesses.allFinite() ||
      !cov.loadings.allFinite()) {
    fail(ErrorKind::NotPositiveDefinite, "low-rank covariance: uniquenesses must be positive and finite");
  }
}

}  // namespace

LowRankFactor::LowRankFactor(const LowRankCov& cov) : cov_(cov) {
  check_low_rank(cov_);
  psi_inv_ = cov_.uniquenesses.cwiseInverse();
  psi_inv_loadings_ = psi_inv_.asDiagonal() * cov_.loadings;
  Matrix inner = Matrix::Identity(cov_.q(), cov_.q()) + cov_.loadings.transpose() * psi_inv_loadings_;
  inner_.compute(inner);
  if (inner_.info() != Eigen::Success) {
    fail(ErrorKind::NotPositiveDefinite, "woodbury: inner q x q matrix is not positive definite");
  }
  const Matrix l = inner_.matrixL();
  log_det_ = 2.0 * l.diagonal().array().log().sum() + cov_.uniquenesses.array().log().sum();
  if (!std::isfinite(log_det_)) {
    fail(ErrorKind::NotPositiveDefinite, "woodbury: non-finite log-determinant");
  }
}

double LowRankFactor::mahalanobis(const Vector& d) const {
  const double diag_part = (d.array().square() * psi_inv_.array()).sum();
  if (cov_.q() == 0) return diag_part;
  const Vector v = psi_inv_loadings_.transpose() * d;
  const double correction = inner_.matrixL().solve(v).squaredNorm();
  return std::max(0.0, diag_part - correction);
}

Matrix LowRankFactor::inverse() const {
  Matrix out = -psi_inv_loadings_ * inner_.solve(psi_inv_loadings_.transpose());
  out.diagonal() += psi_inv_;
  return out;
}

Matrix LowRankFactor::inverse_times_loadings() const {
  // Psi^{-1} L - Psi^{-1} L M^{-1} L' Psi^{-1} L collapses to Psi^{-1} L M^{-1}.
  return inner_.solve(psi_inv_loadings_.transpose()).transpose();
}

Matrix woodbury_inverse(const LowRankCov& cov) { return LowRankFactor(cov).inverse(); }

double woodbury_logdet(const LowRankCov& cov) { return LowRankFactor(cov).log_det(); }

Index CovFactor::dim() const {
  return std::visit([](const auto& f) { return f.dim(); }, impl_);
}

double CovFactor::log_det() const {
  return std::visit([](const auto& f) { return f.log_det(); }, impl_);
}

double CovFactor::mahalanobis(const Vector& d) const {
  return std::visit([&](const auto& f) { return f.mahalanobis(d); }, impl_);
}

// ---------------------------------------------------------------------------
// Box-constrained Nelder-Mead

void ContaminationBox::validate() const {
  if (!(alpha_min > 0.0 && alpha_min < 1.0)) {
    fail(ErrorKind::InvalidArgument, "alpha_min must lie in (0, 1)");
  }
  if (!(eta_min >= 1.0 && eta_max > eta_min && std::isfinite(eta_max))) {
    fail(ErrorKind::InvalidArgument, "eta bounds must satisfy 1 <= eta_min < eta_max < inf");
  }
}

bool ContaminationBox::contains(double alpha, double eta) const {
  return alpha > alpha_min && alpha < 1.0 && eta > eta_min && eta < eta_max;
}

namespace {

double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double logit(double u) { return std::log(u) - std::log1p(-u); }

double map_open(double t, double lo, double hi) {
  double v = lo + (hi - lo) * logistic(t);
  if (v <= lo) v = std::nextafter(lo, hi);
  if (v >= hi) v = std::nextafter(hi, lo);
  return v;
}

double unmap_open(double v, double lo, double hi) { return logit((v - lo) / (hi - lo)); }

using Point = std::array<double, 2>;

}  // namespace

NelderMeadResult nelder_mead_maximize(const BoxedObjective& f, const BoxedPoint2& start,
                                      const ContaminationBox& box,
                                      const NelderMeadOptions& options) {
  box.validate();
  if (!box.contains(start.alpha, start.eta)) {
    std::ostringstream msg;
    msg << "nelder_mead_maximize: start (" << start.alpha << ", " << start.eta
        << ") is outside the feasible box";
    fail(ErrorKind::InvalidArgument, msg.str());
  }

  auto to_box = [&](const Point& u) {
    return BoxedPoint2{map_open(u[0], box.alpha_min, 1.0),
                       map_open(u[1], box.eta_min, box.eta_max)};
  };

  NelderMeadResult result;
  result.start_value = f(start);
  result.point = start;
  result.value = result.start_value;
  result.evaluations = 1;
  if (!std::isfinite(result.start_value)) {
    fail(ErrorKind::NonFiniteObjective, "nelder_mead_maximize: objective is not finite at the start");
  }

  // Minimize the negated objective; non-finite values act as +inf.
  auto cost = [&](const Point& u) {
    ++result.evaluations;
    const double v = f(to_box(u));
    return std::isfinite(v) ? -v : std::numeric_limits<double>::infinity();
  };

  const Point u0{unmap_open(start.alpha, box.alpha_min, 1.0),
                 unmap_open(start.eta, box.eta_min, box.eta_max)};
  const double step = std::max(0.1, 0.1 * std::max(std::abs(u0[0]), std::abs(u0[1])));

  std::array<Point, 3> x{u0, Point{u0[0] + step, u0[1]}, Point{u0[0], u0[1] + step}};
  std::array<double, 3> g{-result.start_value, cost(x[1]), cost(x[2])};

  auto order = [&] {
    std::array<int, 3> idx{0, 1, 2};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return g[a] < g[b]; });
    std::array<Point, 3> xs{x[idx[0]], x[idx[1]], x[idx[2]]};
    std::array<double, 3> gs{g[idx[0]], g[idx[1]], g[idx[2]]};
    x = xs;
    g = gs;
  };

  auto affine = [](const Point& a, const Point& b, double t) {
    // a + t (b - a)
    return Point{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
  };

  while (true) {
    order();
    if (result.evaluations >= options.max_evals) break;
    if (std::isfinite(g[2]) && g[2] - g[0] <= options.tol * (std::abs(g[0]) + options.tol)) break;

    const Point centroid{0.5 * (x[0][0] + x[1][0]), 0.5 * (x[0][1] + x[1][1])};
    const Point xr = affine(centroid, x[2], -1.0);
    const double gr = cost(xr);

    if (gr < g[0]) {
      const Point xe = affine(centroid, x[2], -2.0);
      const double ge = cost(xe);
      if (ge < gr) {
        x[2] = xe;
        g[2] = ge;
      } else {
        x[2] = xr;
        g[2] = gr;
      }
      continue;
    }
    if (gr < g[1]) {
      x[2] = xr;
      g[2] = gr;
      continue;
    }

    bool accepted = false;
    if (gr < g[2]) {
      const Point xc = affine(centroid, xr, 0.5);
      const double gc = cost(xc);
      if (gc <= gr) {
        x[2] = xc;
        g[2] = gc;
        accepted = true;
      }
    } else {
      const Point xc = affine(centroid, x[2], 0.5);
      const double gc = cost(xc);
      if (gc < g[2]) {
        x[2] = xc;
        g[2] = gc;
        accepted = true;
      }
    }
    if (!accepted) {
      for (int i = 1; i < 3; ++i) {
        x[i] = affine(x[0], x[i], 0.5);
        g[i] = cost(x[i]);
      }
    }
  }

  if (-g[0] > result.start_value) {
    result.point = to_box(x[0]);
    result.value = -g[0];
  }
  return result;
}

// ---------------------------------------------------------------------------
// Chi-square tail

namespace {

constexpr int kMaxGammaIterations = 10000;
constexpr double kGammaEps = 1e-16;

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxGammaIterations; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_continued_fraction(double a, double x) {
  // Modified Lentz evaluation of the continued fraction for Q(a, x).
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxGammaIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0)) fail(ErrorKind::InvalidArgument, "regularized_gamma_q: a must be positive");
  if (!(x >= 0.0)) fail(ErrorKind::InvalidArgument, "regularized_gamma_q: x must be non-negative");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return std::clamp(1.0 - gamma_p_series(a, x), 0.0, 1.0);
  return std::clamp(gamma_q_continued_fraction(a, x), 0.0, 1.0);
}

double chi2_sf(double x, int df) {
  if (df < 1) fail(ErrorKind::InvalidArgument, "chi2_sf: degrees of freedom must be positive");
  if (!(x >= 0.0)) fail(ErrorKind::InvalidArgument, "chi2_sf: x must be non-negative");
  if (df == 2) return std::exp(-0.5 * x);
  return regularized_gamma_q(0.5 * df, 0.5 * x);
}

}  // namespace cgfa
