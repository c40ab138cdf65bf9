#include "cgfa/errors.hpp"
#include "cgfa/mcnfa.hpp"

#include <limits>
#include <random>

namespace cgfa {

namespace {

struct Clustering {
  std::vector<int> labels;
  double inertia = std::numeric_limits<double>::infinity();
};

Matrix seed_centers(const Matrix& Z, int G, std::mt19937_64& rng) {
  const Index n = Z.rows();
  Matrix centers(G, Z.cols());
  std::uniform_int_distribution<Index> pick(0, n - 1);
  centers.row(0) = Z.row(pick(rng));
  Vector d2 = (Z.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int k = 1; k < G; ++k) {
    const double total = d2.sum();
    Index chosen = n - 1;
    if (total > 0.0) {
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (Index i = 0; i < n; ++i) {
        u -= d2(i);
        if (u < 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    centers.row(k) = Z.row(chosen);
    d2 = d2.cwiseMin((Z.rowwise() - centers.row(k)).rowwise().squaredNorm());
  }
  return centers;
}

Clustering lloyd(const Matrix& Z, Matrix centers) {
  const Index n = Z.rows();
  const Index G = centers.rows();
  Clustering c;
  c.labels.assign(static_cast<std::size_t>(n), -1);
  Vector best_d(n);

  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      Index arg = 0;
      const double d = (centers.rowwise() - Z.row(i)).rowwise().squaredNorm().minCoeff(&arg);
      best_d(i) = d;
      if (c.labels[static_cast<std::size_t>(i)] != static_cast<int>(arg)) {
        c.labels[static_cast<std::size_t>(i)] = static_cast<int>(arg);
        changed = true;
      }
    }

    Matrix sums = Matrix::Zero(G, Z.cols());
    Vector counts = Vector::Zero(G);
    for (Index i = 0; i < n; ++i) {
      const auto k = c.labels[static_cast<std::size_t>(i)];
      sums.row(k) += Z.row(i);
      counts(k) += 1.0;
    }
    for (Index k = 0; k < G; ++k) {
      if (counts(k) > 0.0) {
        centers.row(k) = sums.row(k) / counts(k);
        continue;
      }
      // An empty cluster takes over the point farthest from its center.
      Index far = 0;
      best_d.maxCoeff(&far);
      centers.row(k) = Z.row(far);
      c.labels[static_cast<std::size_t>(far)] = static_cast<int>(k);
      best_d(far) = 0.0;
      changed = true;
    }
    if (!changed) break;
  }

  c.inertia = 0.0;
  for (Index i = 0; i < n; ++i) {
    c.inertia += (Z.row(i) - centers.row(c.labels[static_cast<std::size_t>(i)])).squaredNorm();
  }
  return c;
}

}  // namespace

std::vector<int> kmeans_init(const Matrix& X, int G, int restarts, std::uint64_t seed) {
  const Index n = X.rows();
  if (G < 1) fail(ErrorKind::InvalidArgument, "kmeans_init: G must be at least 1");
  if (G > n) fail(ErrorKind::InvalidArgument, "kmeans_init: G exceeds the number of rows");
  if (restarts < 1) fail(ErrorKind::InvalidArgument, "kmeans_init: restarts must be at least 1");
  if (G == 1) return std::vector<int>(static_cast<std::size_t>(n), 0);

  const Matrix centered = X.rowwise() - X.colwise().mean();
  Vector sd = (centered.array().square().colwise().sum() / static_cast<double>(n)).sqrt();
  for (Index j = 0; j < sd.size(); ++j) {
    if (!(sd(j) > 0.0)) sd(j) = 1.0;
  }
  const Matrix Z = centered.array().rowwise() / sd.transpose().array();

  // The stream depends on G as well, so candidates in a grid never share one.
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(G)};
  std::mt19937_64 rng(seq);

  Clustering best;
  for (int r = 0; r < restarts; ++r) {
    Clustering c = lloyd(Z, seed_centers(Z, G, rng));
    if (c.inertia < best.inertia) best = std::move(c);
  }
  return best.labels;
}

}  // namespace cgfa
