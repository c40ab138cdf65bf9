#pragma once

// Property suites shared by the doctest binaries and the acceptance runner.

#include <string>

namespace cgfa::testing {

struct CheckResult {
  bool ok = true;
  std::string detail;
};

struct FitSuiteResult {
  CheckResult monotone;  // log-likelihood never drops by more than 1e-8 per step
  CheckResult bounds;    // weights in [1/eta, 1], responsibility rows sum to 1
};

/// Seeded synthetic fits: fit_cn on `cn_runs` datasets and fit_cnfa, fit_mcnfa
/// on `fa_runs` datasets each, observing every E-step.
FitSuiteResult check_fit_suite(int cn_runs = 50, int fa_runs = 30);

CheckResult check_woodbury_vs_dense(int cases = 100);
CheckResult check_cn_normalization();
CheckResult check_fa_fixed_point(int cases = 50);
CheckResult check_single_component_reductions();
CheckResult check_cn_recovery();
CheckResult check_parameter_counts();

}  // namespace cgfa::testing
