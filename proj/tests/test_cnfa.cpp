#include "doctest.h"

#include "support.hpp"

#include "cgfa/cn.hpp"
#include "cgfa/cnfa.hpp"
#include "cgfa/errors.hpp"

#include <Eigen/QR>

#include <cmath>

using namespace cgfa;
using namespace cgfa::testing;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a cgfa::Error");
  return ErrorKind::InvalidArgument;
}

Matrix one(double v) { return Matrix::Constant(1, 1, v); }

// Expected complete-data objective of the loadings cycle, up to constants.
double q2(const Matrix& S, const Matrix& gamma, const Matrix& R, const Matrix& L, const Vector& psi) {
  const Matrix psi_inv = psi.cwiseInverse().asDiagonal();
  return -(psi.array().log().sum() + (psi_inv * S).trace() - 2.0 * (psi_inv * L * gamma.transpose() * S).trace() +
           (L.transpose() * psi_inv * L * R).trace());
}

}  // namespace

TEST_CASE("gamma matrix") {
  CHECK(gamma_matrix(Matrix::Zero(3, 2), Vector::Ones(3)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(gamma_matrix(one(1.0), Vector::Ones(1))(0, 0) == doctest::Approx(0.5));

  Rng rng(30);
  for (int c = 0; c < 100; ++c) {
    const Index p = c == 0 ? 30 : 2 + c % 30;
    const Index q = c == 0 ? 2 : 1 + c % std::min<Index>(4, p - 1);
    const Matrix L = normal_matrix(rng, p, q);
    const Vector psi = random_positive(rng, p, 0.2, 2.0);
    Matrix dense = L * L.transpose();
    dense.diagonal() += psi;
    CHECK((gamma_matrix(L, psi) - dense.inverse() * L).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("second cycle statistics") {
  Rng rng(31);
  const Matrix X = normal_matrix(rng, 50, 4);
  const Vector mean = X.colwise().mean().transpose();
  const Matrix centered = X.rowwise() - mean.transpose();
  const SecondCycleStats s =
      second_cycle_stats(X, mean, Vector::Ones(50), Matrix::Zero(4, 2), Vector::Ones(4));
  CHECK((s.scatter - centered.transpose() * centered / 50.0).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((s.r - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);

  // p = q = 1 with S = 2: two points at +-sqrt(2) around zero.
  Matrix Y(2, 1);
  Y << std::sqrt(2.0), -std::sqrt(2.0);
  const SecondCycleStats t = second_cycle_stats(Y, Vector::Zero(1), Vector::Ones(2), one(1.0), Vector::Ones(1));
  CHECK(t.scatter(0, 0) == doctest::Approx(2.0));
  CHECK(t.gamma(0, 0) == doctest::Approx(0.5));
  CHECK(t.r(0, 0) == doctest::Approx(1.0));

  const LoadingsUpdate u = update_loadings(t, Vector::Constant(1, 1e-10));
  CHECK(u.loadings(0, 0) == doctest::Approx(1.0));
  CHECK(u.uniquenesses(0) == doctest::Approx(1.0));
}

TEST_CASE("loadings update with zero gamma keeps the scatter diagonal") {
  Rng rng(32);
  const Matrix S = random_spd(rng, 4);
  SecondCycleStats stats{S, Matrix::Identity(2, 2), Matrix::Zero(4, 2)};
  const LoadingsUpdate u = update_loadings(stats, Vector::Constant(4, 1e-10));
  CHECK(u.loadings.cwiseAbs().maxCoeff() == 0.0);
  CHECK((u.uniquenesses - S.diagonal()).cwiseAbs().maxCoeff() < 1e-15);

  stats.r = Matrix::Zero(2, 2);
  CHECK(kind_of([&] { update_loadings(stats, Vector::Constant(4, 1e-10)); }) == ErrorKind::SingularR);
}

TEST_CASE("loadings update maximizes the expected objective") {
  Rng rng(33);
  std::normal_distribution<double> n01;
  for (int c = 0; c < 10; ++c) {
    const Matrix X = normal_matrix(rng, 80, 3) * random_spd(rng, 3);
    const Vector mu = X.colwise().mean().transpose();
    const Matrix L0 = normal_matrix(rng, 3, 1);
    const Vector psi0 = random_positive(rng, 3, 0.3, 1.5);
    const SecondCycleStats s = second_cycle_stats(X, mu, Vector::Ones(80), L0, psi0);
    const LoadingsUpdate u = update_loadings(s, Vector::Constant(3, 1e-10));
    const double best = q2(s.scatter, s.gamma, s.r, u.loadings, u.uniquenesses);
    for (int k = 0; k < 200; ++k) {
      const double step = k < 100 ? 1e-3 : 1e-1;
      Matrix L = u.loadings;
      Vector psi = u.uniquenesses;
      for (Index j = 0; j < 3; ++j) {
        L(j, 0) += step * n01(rng);
        psi(j) = std::max(1e-6, psi(j) + step * n01(rng));
      }
      CHECK(q2(s.scatter, s.gamma, s.r, L, psi) <= best + 1e-12);
    }
  }
}

TEST_CASE("factor analysis recovers a one-factor covariance") {
  Rng rng(34);
  const Index p = 5;
  const Matrix lambda = normal_matrix(rng, p, 1);
  const Vector psi = Vector::Constant(p, 0.5);
  const Matrix X = sample_cnfa(rng, 5000, Vector::Zero(p), lambda, psi);
  const CnfaFitReport r = fit_gfa(X, 1);
  Matrix truth = lambda * lambda.transpose();
  truth.diagonal() += psi;
  CHECK((r.params.sigma() - truth).norm() < 0.1);
  for (std::size_t k = 1; k < r.loglik_trace.size(); ++k) CHECK(r.loglik_trace[k] - r.loglik_trace[k - 1] >= -1e-8);
}

TEST_CASE("contaminated fit on clean factor data stays close to the Gaussian fit") {
  Rng rng(35);
  const Matrix X = sample_cnfa(rng, 400, Vector::Zero(6), normal_matrix(rng, 6, 2), random_positive(rng, 6, 0.3, 1));
  const CnfaFitReport g = fit_gfa(X, 2);
  const CnfaFitReport c = fit_cnfa(X, 2);
  CHECK(c.loglik >= g.loglik);
  CHECK(c.loglik - g.loglik < 2.0);
  CHECK(c.baseline_loglik == doctest::Approx(g.loglik));
  // Either almost no bad points or a bad component barely wider than the good one.
  CHECK((c.params.alpha > 0.9 || c.params.eta < 1.5));
}

TEST_CASE("contaminated fit flags planted outliers") {
  Rng rng(36);
  const Index p = 6;
  Matrix X = sample_cnfa(rng, 300, Vector::Zero(p), normal_matrix(rng, p, 1), random_positive(rng, p, 0.3, 1));
  for (Index i = 0; i < 10; ++i) X.row(i) = 12.0 * normal_vector(rng, p).transpose();
  const CnfaFitReport r = fit_cnfa(X, 1);
  CHECK(r.loglik >= r.baseline_loglik);
  int flagged_planted = 0;
  for (Index i = 0; i < 10; ++i) flagged_planted += r.bad_flags[static_cast<std::size_t>(i)] ? 1 : 0;
  CHECK(flagged_planted == 10);
  for (Index i = 0; i < X.rows(); ++i)
    CHECK(r.bad_flags[static_cast<std::size_t>(i)] == (r.good_prob(i) <= 0.5));
  const Vector floor = psi_floor_for(X);
  CHECK((r.params.uniquenesses.array() >= floor.array()).all());
}

TEST_CASE("fit does not depend on the rotation of the starting loadings") {
  Rng rng(37);
  const Index p = 7, q = 3;
  const Matrix X = sample_cnfa(rng, 250, Vector::Zero(p), normal_matrix(rng, p, q), random_positive(rng, p, 0.3, 1),
                               0.85, 8.0);
  const CnfaFitReport g = fit_gfa(X, q);
  const Matrix Q = Eigen::HouseholderQR<Matrix>(normal_matrix(rng, q, q)).householderQ();
  CnfaParams rotated = g.params;
  rotated.loadings = g.params.loadings * Q;
  const CnfaFitReport a = fit_cnfa_from(X, g.params, true);
  const CnfaFitReport b = fit_cnfa_from(X, rotated, true);
  CHECK(std::abs(a.loglik - b.loglik) < 1e-6);
}

TEST_CASE("rank checks and parameter counts") {
  Rng rng(38);
  const Matrix X = normal_matrix(rng, 30, 4);
  CHECK(kind_of([&] { fit_gfa(X, 0); }) == ErrorKind::InvalidRank);
  CHECK(kind_of([&] { fit_cnfa(X, 4); }) == ErrorKind::InvalidRank);
  CHECK(count_params_cnfa(8, 1, true) == 26);
  CHECK(count_params_cnfa(8, 1, false) == 24);
  CHECK(count_params_cnfa(8, 2, true) == 33);
  CHECK(kind_of([] { count_params_cnfa(8, 8, true); }) == ErrorKind::InvalidRank);
  CHECK(kind_of([] { count_params_cnfa(8, 0, true); }) == ErrorKind::InvalidRank);
}
