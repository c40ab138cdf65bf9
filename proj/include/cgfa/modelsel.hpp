#pragma once

#include "cgfa/config.hpp"
#include "cgfa/model.hpp"
#include "cgfa/numerics.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace cgfa {

struct IntRange {
  int lo = 1;
  int hi = 1;
};

struct ModelScore {
  ModelId id;
  bool fitted = false;
  std::string failure;  // empty when fitted
  double loglik = 0.0;
  std::size_t m = 0;
  std::size_t n = 0;
  double bic = 0.0;
};

struct Selection {
  std::vector<ModelScore> ranked;  // fitted by BIC (best first), then failures
  FitResult best;
};

/// Candidate list for one family. Single-distribution families ignore the G
/// range; full-covariance families ignore the q range.
std::vector<ModelId> grid_candidates(Family family, IntRange g_range, IntRange q_range);

/// True when a should rank before b: larger BIC, then smaller m, then smaller
/// G, then smaller q.
bool ranks_before(const ModelScore& a, const ModelScore& b);

/// Fits every candidate, records failures without aborting, and returns the
/// ranked scores with the best fit. threads = 0 uses the hardware concurrency;
/// the result does not depend on the thread count. Throws AllCandidatesFailed.
Selection grid_search(const Matrix& X, const std::vector<ModelId>& candidates,
                      const FitConfig& cfg = {}, unsigned threads = 1);

Selection grid_search(const Matrix& X, Family family, IntRange g_range, IntRange q_range,
                      const FitConfig& cfg = {}, unsigned threads = 1);

}  // namespace cgfa
