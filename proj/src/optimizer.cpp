#include "pigan/optimizer.hpp"

#include <cmath>

namespace pigan {

AdamState AdamState::create(const ParameterSet& params, AdamConfig cfg) {
    AdamState s;
    s.cfg = cfg;
    s.m.resize(params.layers.size());
    s.v.resize(params.layers.size());
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        const LayerParams& p = params.layers[i];
        auto zeros_like = [](const Tensor& t) { return t.numel() ? Tensor(t.shape) : Tensor(); };
        s.m[i].weight = zeros_like(p.weight);
        s.m[i].bias = zeros_like(p.bias);
        s.m[i].gamma = zeros_like(p.gamma);
        s.m[i].beta = zeros_like(p.beta);
        s.v[i].weight = zeros_like(p.weight);
        s.v[i].bias = zeros_like(p.bias);
        s.v[i].gamma = zeros_like(p.gamma);
        s.v[i].beta = zeros_like(p.beta);
    }
    return s;
}

namespace {

void update_tensor(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v, const AdamConfig& cfg,
                   double bias1, double bias2) {
    if (param.numel() == 0) return;
    if (grad.numel() != param.numel())
        throw DimensionError("gradient shape does not match parameter shape");
    if (!grad.all_finite()) throw NumericError("non-finite gradient in adam step");
    const std::size_t n = param.numel();
#pragma omp parallel for schedule(static) if (n >= 8192)
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grad.data[i];
        m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * g;
        v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * g * g;
        const double mhat = m.data[i] / bias1;
        const double vhat = v.data[i] / bias2;
        param.data[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

}  // namespace

void adam_step(ParameterSet& params, const Gradients& grads, AdamState& state) {
    if (grads.layers.size() != params.layers.size())
        throw DimensionError("gradient layer count does not match parameters");
    state.step += 1;
    const double t = static_cast<double>(state.step);
    // 1 - beta^t; with beta = 0 this is exactly 1 and the update reduces to
    // lr * g / (|g| + eps).
    const double bias1 = 1.0 - std::pow(state.cfg.beta1, t);
    const double bias2 = 1.0 - std::pow(state.cfg.beta2, t);
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        update_tensor(params.layers[i].weight, grads.layers[i].weight, state.m[i].weight,
                      state.v[i].weight, state.cfg, bias1, bias2);
        update_tensor(params.layers[i].bias, grads.layers[i].bias, state.m[i].bias,
                      state.v[i].bias, state.cfg, bias1, bias2);
        update_tensor(params.layers[i].gamma, grads.layers[i].gamma, state.m[i].gamma,
                      state.v[i].gamma, state.cfg, bias1, bias2);
        update_tensor(params.layers[i].beta, grads.layers[i].beta, state.m[i].beta,
                      state.v[i].beta, state.cfg, bias1, bias2);
    }
}

}  // namespace pigan
