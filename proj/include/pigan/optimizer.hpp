#pragma once

#include "pigan/network.hpp"

namespace pigan {

struct AdamConfig {
    double learning_rate = 0.002;
    double beta1 = 0.5;  // adversarial-training convention
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig cfg;
    std::uint64_t step = 0;
    std::vector<LayerParams> m, v;  // first/second moment, mirroring the parameter slots

    static AdamState create(const ParameterSet& params, AdamConfig cfg);
};

/// One bias-corrected Adam update. Throws NumericError on non-finite
/// gradients; zero gradients leave parameters unchanged.
void adam_step(ParameterSet& params, const Gradients& grads, AdamState& state);

}  // namespace pigan
