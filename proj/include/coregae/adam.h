#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "coregae/dense.h"

namespace coregae {

// Bias-corrected Adam. Moments are created on the first step.
struct AdamState {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<DenseMatrix> first_moment;
  std::vector<DenseMatrix> second_moment;
};

void adam_step(AdamState& state, std::span<DenseMatrix* const> params,
               std::span<const DenseMatrix* const> grads);

}  // namespace coregae
