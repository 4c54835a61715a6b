#pragma once

#include <cstdint>
#include <vector>

#include "pigan/common.hpp"
#include "pigan/tensor.hpp"

namespace pigan {

enum class Mode { Train, Infer };

struct LayerSpec {
    enum class Kind : std::uint8_t {
        Dense = 0,
        ConvStride2 = 1,
        ConvStride1 = 2,
        ConvUpsample2 = 3,  // stride-1 convolution followed by x2 bilinear upsampling
        BatchNorm = 4,
        ReLU = 5,
        LeakyReLU = 6,
        Sigmoid = 7,
        Tanh = 8,
        Reshape = 9,
    };

    Kind kind{};
    std::size_t in_features = 0, out_features = 0;              // dense
    std::size_t in_channels = 0, out_channels = 0, kernel = 0;  // conv kinds
    std::size_t features = 0;                                   // batchnorm
    double slope = 0.2;                                         // leaky relu
    std::vector<std::size_t> target;                            // reshape, per-sample shape
    // A bias ahead of batch norm is redundant (the shift cancels in the
    // normalization); such layers are built bias-free.
    bool use_bias = true;

    static LayerSpec dense(std::size_t in, std::size_t out, bool bias = true);
    static LayerSpec conv_stride2(std::size_t cin, std::size_t cout, std::size_t k,
                                  bool bias = true);
    static LayerSpec conv_stride1(std::size_t cin, std::size_t cout, std::size_t k,
                                  bool bias = true);
    static LayerSpec conv_upsample2(std::size_t cin, std::size_t cout, std::size_t k,
                                    bool bias = true);
    static LayerSpec batchnorm(std::size_t features);
    static LayerSpec relu();
    static LayerSpec leaky_relu(double slope = 0.2);
    static LayerSpec sigmoid();
    static LayerSpec tanh_unit();
    static LayerSpec reshape(std::vector<std::size_t> per_sample_shape);

    bool is_conv() const {
        return kind == Kind::ConvStride2 || kind == Kind::ConvStride1 || kind == Kind::ConvUpsample2;
    }
    std::size_t conv_stride() const { return kind == Kind::ConvStride2 ? 2 : 1; }
    const char* name() const;
    void validate() const;
};

struct NetworkSpec {
    std::vector<LayerSpec> layers;

    void validate() const;
    /// Shape of the per-layer outputs for a given input shape; throws
    /// DimensionError naming the offending layer.
    std::vector<std::size_t> output_shape(const std::vector<std::size_t>& input) const;
    std::uint64_t signature() const;
};

struct LayerParams {
    Tensor weight, bias;                // dense / conv
    Tensor gamma, beta;                 // batchnorm scale/shift
    Tensor running_mean, running_var;   // batchnorm inference statistics
};

struct ParameterSet {
    std::vector<LayerParams> layers;
};

/// Gaussian(0, weight_std) weights, zero biases, unit batch-norm scale.
ParameterSet init_parameters(const NetworkSpec& net, RandomStream& rng, double weight_std = 0.02);

struct Tape {
    struct Rec {
        std::vector<std::size_t> input_shape;
        Tensor input;      // layer input (dense, conv, activations)
        Tensor output;     // saved for sigmoid/tanh backward
        Tensor xhat;       // batchnorm normalized input
        Tensor mean, var;  // batchnorm statistics used by this pass
    };
    std::vector<Rec> recs;
    Tensor output;
    Mode mode{};
    std::uint64_t signature = 0;
    std::size_t batch = 0;
};

/// Runs the network. Batch-norm layers use batch statistics in Train mode and
/// running statistics in Infer mode; running statistics are never mutated
/// here (see commit_batchnorm_stats).
Tape forward(const NetworkSpec& net, const ParameterSet& params, const Tensor& input, Mode mode);

struct Gradients {
    std::vector<LayerParams> layers;  // same tensor slots as ParameterSet (stat buffers unused)
    Tensor input;
};

Gradients backward(const NetworkSpec& net, const ParameterSet& params, const Tape& tape,
                   const Tensor& output_grad);

/// Folds the batch statistics recorded on a Train-mode tape into the running
/// statistics: running = momentum * running + (1-momentum) * batch.
void commit_batchnorm_stats(const NetworkSpec& net, ParameterSet& params, const Tape& tape,
                            double momentum = 0.9);

/// Number of optimizable scalars (weights, biases, batch-norm scale/shift).
std::size_t parameter_count(const ParameterSet& params);

/// Applies fn to every optimizable tensor slot, in a fixed order.
template <typename P, typename Fn>
void for_each_param_tensor(P& params, Fn&& fn) {
    for (auto& layer : params.layers) {
        fn(layer.weight);
        fn(layer.bias);
        fn(layer.gamma);
        fn(layer.beta);
    }
}

}  // namespace pigan
