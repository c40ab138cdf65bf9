#include "doctest.h"

#include "property_checks.hpp"

using namespace cgfa::testing;

TEST_CASE("fits are monotone and their E-steps stay in bounds") {
  const FitSuiteResult r = check_fit_suite(50, 30);
  INFO(r.monotone.detail);
  CHECK(r.monotone.ok);
  INFO(r.bounds.detail);
  CHECK(r.bounds.ok);
}

TEST_CASE("Woodbury agrees with dense algebra") {
  const CheckResult r = check_woodbury_vs_dense(100);
  INFO(r.detail);
  CHECK(r.ok);
}

TEST_CASE("contaminated density integrates to one") {
  const CheckResult r = check_cn_normalization();
  INFO(r.detail);
  CHECK(r.ok);
}

TEST_CASE("loadings update fixed point") {
  const CheckResult r = check_fa_fixed_point(50);
  INFO(r.detail);
  CHECK(r.ok);
}

TEST_CASE("single-component mixtures reduce to the plain fits") {
  const CheckResult r = check_single_component_reductions();
  INFO(r.detail);
  CHECK(r.ok);
}

TEST_CASE("parameter counts") {
  const CheckResult r = check_parameter_counts();
  INFO(r.detail);
  CHECK(r.ok);
}
