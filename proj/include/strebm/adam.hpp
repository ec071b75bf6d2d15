#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "strebm/matrix.hpp"

namespace strebm {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second moment accumulators for one parameter array.
struct AdamMoments {
  Vector m;
  Vector v;
};

// Bias-corrected Adam update of `param` in place. `step` is 1-based.
void adam_update(std::span<double> param, std::span<const double> grad, AdamMoments& moments,
                 const AdamConfig& config, double learning_rate, std::size_t step);

}  // namespace strebm
