#pragma once

// Samplers and brute-force oracles shared by the test binaries.

#include "cgfa/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace cgfa::testing {

using Rng = std::mt19937_64;

inline Vector normal_vector(Rng& rng, Index p) {
  std::normal_distribution<double> n01;
  Vector v(p);
  for (Index j = 0; j < p; ++j) v(j) = n01(rng);
  return v;
}

inline Matrix normal_matrix(Rng& rng, Index r, Index c) {
  std::normal_distribution<double> n01;
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = n01(rng);
  return m;
}

inline Matrix random_spd(Rng& rng, Index p) {
  const Matrix a = normal_matrix(rng, p, p);
  return a * a.transpose() / static_cast<double>(p) + 0.5 * Matrix::Identity(p, p);
}

inline Vector random_positive(Rng& rng, Index p, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(p);
  for (Index j = 0; j < p; ++j) v(j) = u(rng);
  return v;
}

/// Rows drawn from CN(mu, sigma, alpha, eta). bad[i] records which rows came
/// from the inflated component when the pointer is given.
inline Matrix sample_cn(Rng& rng, Index n, const Vector& mu, const Matrix& sigma, double alpha, double eta,
                        std::vector<bool>* bad = nullptr) {
  const Eigen::LLT<Matrix> llt(sigma);
  const Matrix L = llt.matrixL();
  std::bernoulli_distribution is_good(alpha);
  Matrix X(n, mu.size());
  if (bad) bad->assign(static_cast<std::size_t>(n), false);
  for (Index i = 0; i < n; ++i) {
    const bool good = is_good(rng);
    const double scale = good ? 1.0 : std::sqrt(eta);
    X.row(i) = (mu + scale * (L * normal_vector(rng, mu.size()))).transpose();
    if (bad) (*bad)[static_cast<std::size_t>(i)] = !good;
  }
  return X;
}

/// Rows drawn from a contaminated factor model with covariance
/// Lambda Lambda' + diag(psi) (alpha = 1 gives plain factor data).
inline Matrix sample_cnfa(Rng& rng, Index n, const Vector& mu, const Matrix& loadings, const Vector& psi,
                          double alpha = 1.0, double eta = 1.0) {
  Matrix sigma = loadings * loadings.transpose();
  sigma.diagonal() += psi;
  return sample_cn(rng, n, mu, sigma, alpha, eta);
}

inline double dense_logdet(const Matrix& m) {
  const Eigen::LLT<Matrix> llt(m);
  const Matrix L = llt.matrixL();
  return 2.0 * L.diagonal().array().log().sum();
}

/// Adjusted Rand index between two labelings.
inline double adjusted_rand(const std::vector<int>& a, const std::vector<int>& b) {
  const int ka = *std::max_element(a.begin(), a.end()) + 1;
  const int kb = *std::max_element(b.begin(), b.end()) + 1;
  std::vector<std::vector<double>> t(static_cast<std::size_t>(ka), std::vector<double>(static_cast<std::size_t>(kb)));
  for (std::size_t i = 0; i < a.size(); ++i) t[static_cast<std::size_t>(a[i])][static_cast<std::size_t>(b[i])] += 1;
  auto c2 = [](double x) { return x * (x - 1) / 2; };
  double sum_ij = 0, sum_a = 0, sum_b = 0;
  std::vector<double> cols(static_cast<std::size_t>(kb));
  for (const auto& row : t) {
    double r = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      sum_ij += c2(row[j]);
      r += row[j];
      cols[j] += row[j];
    }
    sum_a += c2(r);
  }
  for (double c : cols) sum_b += c2(c);
  const double expected = sum_a * sum_b / c2(static_cast<double>(a.size()));
  const double max_index = 0.5 * (sum_a + sum_b);
  return (sum_ij - expected) / (max_index - expected);
}

}  // namespace cgfa::testing
