#pragma once

#include "pigan/network.hpp"

namespace pigan {

enum class GradcheckLoss {
    WeightedSum,    // L = sum_i w_i y_i with fixed pseudo-random weights
    SumOfSquares,   // L = 0.5 sum_i w_i y_i^2
};

/// Central-difference gradient check against backward(). The scalar loss
/// weights are pseudo-random but seeded, so runs are reproducible. When the
/// network has more than max_checked optimizable scalars a seeded random
/// subset of that size is perturbed instead.
/// Returns max_i |g_bp - g_fd| / max(|g_bp|, |g_fd|, 1e-8).
double finite_difference_gradcheck(const NetworkSpec& net, const ParameterSet& params,
                                   const Tensor& input, Mode mode, double h,
                                   std::uint64_t seed = 17, std::size_t max_checked = 10000,
                                   GradcheckLoss loss = GradcheckLoss::WeightedSum);

}  // namespace pigan
