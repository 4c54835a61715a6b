#pragma once

#include "pigan/network.hpp"

namespace pigan::presets {

// Desk-scale 16x16 single-channel convolutional pair. The generator follows
// the FC -> (conv + upsample) x2 -> conv pattern with 3x3 kernels; the
// discriminator downsamples with two stride-2 convolutions and ends in a
// dense layer behind a sigmoid. Batch norm placement and the ReLU/leakyReLU
// split between D and G follow the architecture family these mirror.
//
// Layers feeding a batch norm are bias-free (the normalization cancels any
// uniform shift, so the slot would be dead weight).
//
// generator_conv16:  dense(n -> 128*4*4), reshape(128,4,4), bn, leaky(0.2),
//                    conv_up 128->32 k3, bn, leaky(0.2),
//                    conv_up 32->16 k3, bn, leaky(0.2),
//                    conv1 16->1 k3, sigmoid                  => (1,16,16)
// discriminator_conv16: conv2 1->16 k3, bn, relu,
//                    conv2 16->32 k3, bn, relu,
//                    reshape(512), dense 512->1, sigmoid      => (1)
NetworkSpec generator_conv16(std::size_t latent_dim);
NetworkSpec discriminator_conv16();

// Small MLP pair for 2D point-cloud experiments.
NetworkSpec generator_mlp2d(std::size_t latent_dim, std::size_t hidden);
NetworkSpec discriminator_mlp2d(std::size_t hidden);

/// Width of the activation entering the final dense layer (the feature
/// encoding the evaluation module extracts).
std::size_t penultimate_width(const NetworkSpec& net, const std::vector<std::size_t>& input_shape);

}  // namespace pigan::presets
