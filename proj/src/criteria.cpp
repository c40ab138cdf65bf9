#include "cgfa/criteria.hpp"

#include "cgfa/errors.hpp"
#include "cgfa/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cgfa {

double bic(double loglik, std::size_t m, std::size_t n) {
  if (m < 1) fail(ErrorKind::InvalidArgument, "bic: parameter count must be at least 1");
  if (n < 1) fail(ErrorKind::InvalidArgument, "bic: sample size must be at least 1");
  return 2.0 * loglik - static_cast<double>(m) * std::log(static_cast<double>(n));
}

LrTestResult lr_test(double loglik_null, double loglik_alt, int df) {
  if (!std::isfinite(loglik_null) || !std::isfinite(loglik_alt)) {
    fail(ErrorKind::InvalidArgument, "lr_test: log-likelihoods must be finite");
  }
  if (loglik_alt < loglik_null - 1e-6) {
    std::ostringstream msg;
    msg << "lr_test: alternative log-likelihood " << loglik_alt << " is below the null "
        << loglik_null << "; the models are not nested as given";
    fail(ErrorKind::InvalidNesting, msg.str());
  }
  LrTestResult r;
  r.statistic = std::max(0.0, -2.0 * (loglik_null - loglik_alt));
  r.p_value = chi2_sf(r.statistic, df);
  return r;
}

}  // namespace cgfa
