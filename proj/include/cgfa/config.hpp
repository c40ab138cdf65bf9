#pragma once

#include "cgfa/numerics.hpp"

#include <cstdint>
#include <functional>
#include <string_view>

namespace cgfa {

/// Snapshot handed to an IterationObserver after every E-step.
struct IterationView {
  int iteration = 0;
  std::string_view stage;  // "e-step", "cycle-1", "cycle-2", "cycle-3"
  const Matrix* responsibilities = nullptr;  // n x G, null for single-distribution fits
  const Matrix* weights = nullptr;           // n x G
  const Vector* eta = nullptr;               // G
};

using IterationObserver = std::function<void(const IterationView&)>;

struct FitConfig {
  double alpha_min = 0.5;
  double epsilon = 1e-3;
  int max_iter = 1000;
  double eta_max = 1000.0;

  // Nested Gaussian start.
  double initial_alpha = 0.999;
  double initial_eta = 1.001;
  // Keeps (alpha, eta) at their initial values; used by the Gaussian variants.
  bool freeze_contamination = false;

  NelderMeadOptions nelder_mead{};

  std::uint64_t seed = 1;
  int kmeans_restarts = 10;

  // Record the observed log-likelihood after every cycle, not just every
  // iteration.
  bool record_cycles = false;
  IterationObserver observer;

  ContaminationBox box() const {
    ContaminationBox b;
    b.alpha_min = alpha_min;
    b.eta_max = eta_max;
    return b;
  }
};

}  // namespace cgfa
