#pragma once

#include <vector>

namespace cgfa {

/// Aitken-accelerated stopping rule on three consecutive log-likelihoods
/// l0, l1, l2. The asymptotic estimate l_inf = l1 + (l2 - l1) / (1 - a), with
/// a = (l2 - l1) / (l1 - l0), must come within epsilon of l1.
///
/// A stalled trace (|l1 - l0| < 1e-12) counts as converged. A non-finite or
/// accelerating ratio (a >= 1) does not.
bool aitken_converged(double l0, double l1, double l2, double epsilon);

/// Log-likelihood trace with the Aitken rule applied to its last three values.
class ConvergenceMonitor {
 public:
  explicit ConvergenceMonitor(double epsilon);

  void push(double loglik);
  bool converged() const;

  double epsilon() const { return epsilon_; }
  const std::vector<double>& trace() const { return trace_; }

 private:
  double epsilon_;
  std::vector<double> trace_;
};

}  // namespace cgfa
