#pragma once

#include "pigan/tensor.hpp"

namespace pigan::kernels {

// Numeric kernels behind the layer implementations. The default entry points
// are OpenMP-parallel; pigan::kernels::ref holds serial reference versions,
// written as independent textbook loops, used by the equivalence tests and
// the benchmark tool. In the parallel path every output element is produced
// by exactly one thread with a fixed reduction order, so results do not
// depend on the thread count.
//
// Convolutions use zero padding of (kernel-1)/2 on each side, so stride 1
// preserves the spatial size and stride 2 halves even sizes.

// y(m,o) = sum_i x(m,i) w(o,i) + b(o)
void dense_forward(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& y);
// dx(m,i) = sum_o dy(m,o) w(o,i)
void dense_backward_input(const Tensor& dy, const Tensor& w, Tensor& dx);
// dw(o,i) = sum_m dy(m,o) x(m,i);  db(o) = sum_m dy(m,o)
void dense_backward_params(const Tensor& dy, const Tensor& x, Tensor& dw, Tensor& db);

void conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride,
                    Tensor& y);
void conv2d_backward_input(const Tensor& dy, const Tensor& w, std::size_t stride,
                           const std::vector<std::size_t>& input_shape, Tensor& dx);
void conv2d_backward_params(const Tensor& dy, const Tensor& x, std::size_t stride, Tensor& dw,
                            Tensor& db);

// Corner-aligned bilinear upsampling by a fixed factor of 2.
void upsample2_forward(const Tensor& x, Tensor& y);
void upsample2_backward(const Tensor& dy, const std::vector<std::size_t>& input_shape, Tensor& dx);

namespace ref {
void dense_forward(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& y);
void dense_backward_input(const Tensor& dy, const Tensor& w, Tensor& dx);
void dense_backward_params(const Tensor& dy, const Tensor& x, Tensor& dw, Tensor& db);
void conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride,
                    Tensor& y);
void conv2d_backward_input(const Tensor& dy, const Tensor& w, std::size_t stride,
                           const std::vector<std::size_t>& input_shape, Tensor& dx);
void conv2d_backward_params(const Tensor& dy, const Tensor& x, std::size_t stride, Tensor& dw,
                            Tensor& db);
void upsample2_forward(const Tensor& x, Tensor& y);
void upsample2_backward(const Tensor& dy, const std::vector<std::size_t>& input_shape, Tensor& dx);
}  // namespace ref

// Shared shape helpers.
std::size_t conv_out_size(std::size_t in, std::size_t kernel, std::size_t stride);
void check_dense_shapes(const Tensor& x, const Tensor& w, const Tensor& b);
void check_conv_shapes(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride);

}  // namespace pigan::kernels
