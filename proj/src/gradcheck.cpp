#include "pigan/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace pigan {

namespace {

std::vector<Tensor*> param_slots(ParameterSet& params) {
    std::vector<Tensor*> slots;
    for_each_param_tensor(params, [&slots](Tensor& t) {
        if (t.numel()) slots.push_back(&t);
    });
    return slots;
}

double loss_value(const Tensor& out, const std::vector<double>& weights, GradcheckLoss kind) {
    double loss = 0.0;
    if (kind == GradcheckLoss::WeightedSum) {
        for (std::size_t i = 0; i < out.numel(); ++i) loss += weights[i] * out.data[i];
    } else {
        for (std::size_t i = 0; i < out.numel(); ++i)
            loss += 0.5 * weights[i] * out.data[i] * out.data[i];
    }
    return loss;
}

}  // namespace

double finite_difference_gradcheck(const NetworkSpec& net, const ParameterSet& params,
                                   const Tensor& input, Mode mode, double h, std::uint64_t seed,
                                   std::size_t max_checked, GradcheckLoss loss) {
    if (!(h >= 1e-7 && h <= 1e-3)) throw ArgumentError("step size h must lie in [1e-7, 1e-3]");
    ParameterSet work = params;  // perturbed copy
    if (!input.all_finite()) throw NumericError("non-finite gradcheck input");

    Tape tape = forward(net, work, input, mode);
    RandomStream wrng(seed);
    std::vector<double> weights(tape.output.numel());
    for (double& w : weights) w = 0.5 + wrng.uniform01();

    Tensor out_grad(tape.output.shape);
    for (std::size_t i = 0; i < out_grad.numel(); ++i)
        out_grad.data[i] = loss == GradcheckLoss::WeightedSum
                               ? weights[i]
                               : weights[i] * tape.output.data[i];
    Gradients bp = backward(net, work, tape, out_grad);

    // Flatten analytic gradients in slot order.
    std::vector<Tensor*> slots = param_slots(work);
    std::vector<const Tensor*> grad_slots;
    for_each_param_tensor(bp, [&grad_slots](Tensor& t) {
        if (t.numel()) grad_slots.push_back(&t);
    });
    if (grad_slots.size() != slots.size())
        throw ConsistencyError("gradient slots do not mirror parameter slots");

    std::size_t total = 0;
    for (const Tensor* t : slots) total += t->numel();

    // Pick indices to perturb.
    std::vector<std::size_t> picks;
    if (total <= max_checked) {
        picks.resize(total);
        for (std::size_t i = 0; i < total; ++i) picks[i] = i;
    } else {
        RandomStream prng(seed + 1);
        picks.reserve(max_checked);
        // Floyd's sampling over the flat index space.
        std::vector<std::size_t> chosen;
        for (std::size_t j = total - max_checked; j < total; ++j) {
            std::size_t t = prng.uniform_index(j + 1);
            if (std::find(chosen.begin(), chosen.end(), t) == chosen.end())
                chosen.push_back(t);
            else
                chosen.push_back(j);
        }
        picks = std::move(chosen);
        std::sort(picks.begin(), picks.end());
    }

    double max_rel = 0.0;
    std::size_t slot_idx = 0, slot_base = 0;
    for (std::size_t flat : picks) {
        while (flat >= slot_base + slots[slot_idx]->numel()) {
            slot_base += slots[slot_idx]->numel();
            ++slot_idx;
        }
        const std::size_t offset = flat - slot_base;
        double& theta = slots[slot_idx]->data[offset];
        const double saved = theta;

        theta = saved + h;
        const double lp = loss_value(forward(net, work, input, mode).output, weights, loss);
        theta = saved - h;
        const double lm = loss_value(forward(net, work, input, mode).output, weights, loss);
        theta = saved;

        const double g_fd = (lp - lm) / (2.0 * h);
        const double g_bp = grad_slots[slot_idx]->data[offset];
        const double rel =
            std::abs(g_bp - g_fd) / std::max({std::abs(g_bp), std::abs(g_fd), 1e-8});
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

}  // namespace pigan
