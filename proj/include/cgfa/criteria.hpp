#pragma once

#include <cstddef>

namespace cgfa {

/// 2 loglik - m log n; larger is better.
double bic(double loglik, std::size_t m, std::size_t n);

struct LrTestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Likelihood-ratio test of a nested null against its alternative. Slightly
/// negative statistics (within 1e-6) from finite optimization are clamped to 0;
/// anything below that raises InvalidNesting.
LrTestResult lr_test(double loglik_null, double loglik_alt, int df);

}  // namespace cgfa
