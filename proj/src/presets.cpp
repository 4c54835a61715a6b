#include "pigan/presets.hpp"

namespace pigan::presets {

NetworkSpec generator_conv16(std::size_t latent_dim) {
    NetworkSpec net;
    net.layers = {
        LayerSpec::dense(latent_dim, 128 * 4 * 4, /*bias=*/false),
        LayerSpec::reshape({128, 4, 4}),
        LayerSpec::batchnorm(128),
        LayerSpec::leaky_relu(0.2),
        LayerSpec::conv_upsample2(128, 32, 3, /*bias=*/false),
        LayerSpec::batchnorm(32),
        LayerSpec::leaky_relu(0.2),
        LayerSpec::conv_upsample2(32, 16, 3, /*bias=*/false),
        LayerSpec::batchnorm(16),
        LayerSpec::leaky_relu(0.2),
        LayerSpec::conv_stride1(16, 1, 3),
        LayerSpec::sigmoid(),
    };
    return net;
}

NetworkSpec discriminator_conv16() {
    NetworkSpec net;
    net.layers = {
        LayerSpec::conv_stride2(1, 16, 3, /*bias=*/false),
        LayerSpec::batchnorm(16),
        LayerSpec::relu(),
        LayerSpec::conv_stride2(16, 32, 3, /*bias=*/false),
        LayerSpec::batchnorm(32),
        LayerSpec::relu(),
        LayerSpec::reshape({32 * 4 * 4}),
        LayerSpec::dense(32 * 4 * 4, 1),
        LayerSpec::sigmoid(),
    };
    return net;
}

NetworkSpec generator_mlp2d(std::size_t latent_dim, std::size_t hidden) {
    NetworkSpec net;
    net.layers = {
        LayerSpec::dense(latent_dim, hidden), LayerSpec::leaky_relu(0.2),
        LayerSpec::dense(hidden, hidden),     LayerSpec::leaky_relu(0.2),
        LayerSpec::dense(hidden, 2),
    };
    return net;
}

NetworkSpec discriminator_mlp2d(std::size_t hidden) {
    NetworkSpec net;
    net.layers = {
        LayerSpec::dense(2, hidden),      LayerSpec::leaky_relu(0.2),
        LayerSpec::dense(hidden, hidden), LayerSpec::leaky_relu(0.2),
        LayerSpec::dense(hidden, 1),      LayerSpec::sigmoid(),
    };
    return net;
}

std::size_t penultimate_width(const NetworkSpec& net, const std::vector<std::size_t>& input_shape) {
    std::size_t last_dense = net.layers.size();
    for (std::size_t i = 0; i < net.layers.size(); ++i)
        if (net.layers[i].kind == LayerSpec::Kind::Dense) last_dense = i;
    if (last_dense == net.layers.size())
        throw ArgumentError("network has no dense layer to take features from");
    NetworkSpec head;
    head.layers.assign(net.layers.begin(), net.layers.begin() + last_dense);
    if (head.layers.empty()) {
        std::size_t per = 1;
        for (std::size_t i = 1; i < input_shape.size(); ++i) per *= input_shape[i];
        return per;
    }
    const auto shape = head.output_shape(input_shape);
    std::size_t per = 1;
    for (std::size_t i = 1; i < shape.size(); ++i) per *= shape[i];
    return per;
}

}  // namespace pigan::presets
