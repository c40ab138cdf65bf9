#include "cgfa/convergence.hpp"

#include "cgfa/errors.hpp"

#include <cmath>

namespace cgfa {

bool aitken_converged(double l0, double l1, double l2, double epsilon) {
  if (!std::isfinite(l0) || !std::isfinite(l1) || !std::isfinite(l2)) {
    fail(ErrorKind::InvalidArgument, "aitken_converged: log-likelihoods must be finite");
  }
  const double denom = l1 - l0;
  if (std::abs(denom) < 1e-12) return true;
  const double a = (l2 - l1) / denom;
  if (!std::isfinite(a) || a >= 1.0) return false;
  const double l_inf = l1 + (l2 - l1) / (1.0 - a);
  return l_inf - l1 < epsilon;
}

ConvergenceMonitor::ConvergenceMonitor(double epsilon) : epsilon_(epsilon) {
  if (!(epsilon > 0.0)) fail(ErrorKind::InvalidArgument, "convergence epsilon must be positive");
}

void ConvergenceMonitor::push(double loglik) { trace_.push_back(loglik); }

bool ConvergenceMonitor::converged() const {
  const auto k = trace_.size();
  if (k < 3) return false;
  return aitken_converged(trace_[k - 3], trace_[k - 2], trace_[k - 1], epsilon_);
}

}  // namespace cgfa
