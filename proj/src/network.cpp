#include "pigan/network.hpp"

#include <cmath>

#include "pigan/kernels.hpp"

namespace pigan {

namespace {
constexpr double kBnEps = 1e-5;
}

LayerSpec LayerSpec::dense(std::size_t in, std::size_t out, bool bias) {
    LayerSpec s;
    s.kind = Kind::Dense;
    s.in_features = in;
    s.out_features = out;
    s.use_bias = bias;
    return s;
}
LayerSpec LayerSpec::conv_stride2(std::size_t cin, std::size_t cout, std::size_t k, bool bias) {
    LayerSpec s;
    s.kind = Kind::ConvStride2;
    s.in_channels = cin;
    s.out_channels = cout;
    s.kernel = k;
    s.use_bias = bias;
    return s;
}
LayerSpec LayerSpec::conv_stride1(std::size_t cin, std::size_t cout, std::size_t k, bool bias) {
    LayerSpec s;
    s.kind = Kind::ConvStride1;
    s.in_channels = cin;
    s.out_channels = cout;
    s.kernel = k;
    s.use_bias = bias;
    return s;
}
LayerSpec LayerSpec::conv_upsample2(std::size_t cin, std::size_t cout, std::size_t k, bool bias) {
    LayerSpec s;
    s.kind = Kind::ConvUpsample2;
    s.in_channels = cin;
    s.out_channels = cout;
    s.kernel = k;
    s.use_bias = bias;
    return s;
}
LayerSpec LayerSpec::batchnorm(std::size_t features) {
    LayerSpec s;
    s.kind = Kind::BatchNorm;
    s.features = features;
    return s;
}
LayerSpec LayerSpec::relu() {
    LayerSpec s;
    s.kind = Kind::ReLU;
    return s;
}
LayerSpec LayerSpec::leaky_relu(double slope) {
    LayerSpec s;
    s.kind = Kind::LeakyReLU;
    s.slope = slope;
    return s;
}
LayerSpec LayerSpec::sigmoid() {
    LayerSpec s;
    s.kind = Kind::Sigmoid;
    return s;
}
LayerSpec LayerSpec::tanh_unit() {
    LayerSpec s;
    s.kind = Kind::Tanh;
    return s;
}
LayerSpec LayerSpec::reshape(std::vector<std::size_t> per_sample_shape) {
    LayerSpec s;
    s.kind = Kind::Reshape;
    s.target = std::move(per_sample_shape);
    return s;
}

const char* LayerSpec::name() const {
    switch (kind) {
        case Kind::Dense: return "dense";
        case Kind::ConvStride2: return "conv_stride2";
        case Kind::ConvStride1: return "conv_stride1";
        case Kind::ConvUpsample2: return "conv_upsample2";
        case Kind::BatchNorm: return "batchnorm";
        case Kind::ReLU: return "relu";
        case Kind::LeakyReLU: return "leaky_relu";
        case Kind::Sigmoid: return "sigmoid";
        case Kind::Tanh: return "tanh";
        case Kind::Reshape: return "reshape";
    }
    return "?";
}

void LayerSpec::validate() const {
    switch (kind) {
        case Kind::Dense:
            if (in_features == 0 || out_features == 0)
                throw ArgumentError("dense layer sizes must be positive");
            break;
        case Kind::ConvStride2:
        case Kind::ConvStride1:
        case Kind::ConvUpsample2:
            if (in_channels == 0 || out_channels == 0)
                throw ArgumentError("conv channel counts must be positive");
            if (kernel == 0 || kernel % 2 == 0) throw ArgumentError("conv kernels must be odd-sized");
            break;
        case Kind::BatchNorm:
            if (features == 0) throw ArgumentError("batchnorm feature count must be positive");
            break;
        case Kind::LeakyReLU:
            if (!(slope > 0.0 && slope < 1.0)) throw ArgumentError("leaky slope must lie in (0,1)");
            break;
        case Kind::Reshape:
            if (target.empty() || Tensor::numel_of(target) == 0)
                throw ArgumentError("reshape target must be non-empty with positive dims");
            break;
        default: break;
    }
}

void NetworkSpec::validate() const {
    if (layers.empty()) throw ArgumentError("network needs at least one layer");
    for (const auto& l : layers) l.validate();
}

static std::vector<std::size_t> layer_output_shape(const LayerSpec& l,
                                                   const std::vector<std::size_t>& in,
                                                   std::size_t index) {
    const auto fail = [&](const std::string& what) {
        throw DimensionError("layer " + std::to_string(index) + " (" + l.name() + "): " + what +
                             ", input shape " + shape_string(in));
    };
    switch (l.kind) {
        case LayerSpec::Kind::Dense:
            if (in.size() != 2) fail("expects rank-2 input");
            if (in[1] != l.in_features)
                fail("expects " + std::to_string(l.in_features) + " features, got " +
                     std::to_string(in[1]));
            return {in[0], l.out_features};
        case LayerSpec::Kind::ConvStride2:
        case LayerSpec::Kind::ConvStride1:
        case LayerSpec::Kind::ConvUpsample2: {
            if (in.size() != 4) fail("expects rank-4 input");
            if (in[1] != l.in_channels)
                fail("expects " + std::to_string(l.in_channels) + " channels, got " +
                     std::to_string(in[1]));
            const std::size_t s = l.conv_stride();
            std::size_t h = kernels::conv_out_size(in[2], l.kernel, s);
            std::size_t w = kernels::conv_out_size(in[3], l.kernel, s);
            if (l.kind == LayerSpec::Kind::ConvUpsample2) {
                h *= 2;
                w *= 2;
            }
            return {in[0], l.out_channels, h, w};
        }
        case LayerSpec::Kind::BatchNorm: {
            const std::size_t feat = in.size() == 4 ? in[1] : in.size() == 2 ? in[1] : 0;
            if (feat == 0) fail("expects rank-2 or rank-4 input");
            if (feat != l.features)
                fail("expects " + std::to_string(l.features) + " features, got " +
                     std::to_string(feat));
            return in;
        }
        case LayerSpec::Kind::Reshape: {
            std::vector<std::size_t> out;
            out.push_back(in[0]);
            for (std::size_t d : l.target) out.push_back(d);
            std::size_t in_per = 1;
            for (std::size_t i = 1; i < in.size(); ++i) in_per *= in[i];
            if (in_per != Tensor::numel_of(l.target))
                fail("cannot reshape " + std::to_string(in_per) + " values per sample to " +
                     shape_string(l.target));
            return out;
        }
        default:
            return in;  // elementwise
    }
}

std::vector<std::size_t> NetworkSpec::output_shape(const std::vector<std::size_t>& input) const {
    std::vector<std::size_t> s = input;
    for (std::size_t i = 0; i < layers.size(); ++i) s = layer_output_shape(layers[i], s, i);
    return s;
}

std::uint64_t NetworkSpec::signature() const {
    // FNV-1a over the structural fields.
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ULL;
    };
    for (const auto& l : layers) {
        mix(static_cast<std::uint64_t>(l.kind));
        mix(l.in_features);
        mix(l.out_features);
        mix(l.in_channels);
        mix(l.out_channels);
        mix(l.kernel);
        mix(l.features);
        mix(l.use_bias ? 1 : 0);
        mix(static_cast<std::uint64_t>(l.slope * 1e9));
        for (std::size_t d : l.target) mix(d);
    }
    return h;
}

ParameterSet init_parameters(const NetworkSpec& net, RandomStream& rng, double weight_std) {
    net.validate();
    ParameterSet params;
    params.layers.resize(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& l = net.layers[i];
        LayerParams& p = params.layers[i];
        if (l.kind == LayerSpec::Kind::Dense) {
            p.weight = Tensor({l.out_features, l.in_features});
            if (l.use_bias) p.bias = Tensor({l.out_features});
            for (double& v : p.weight.data) v = weight_std * rng.normal();
        } else if (l.is_conv()) {
            p.weight = Tensor({l.out_channels, l.in_channels, l.kernel, l.kernel});
            if (l.use_bias) p.bias = Tensor({l.out_channels});
            for (double& v : p.weight.data) v = weight_std * rng.normal();
        } else if (l.kind == LayerSpec::Kind::BatchNorm) {
            p.gamma = Tensor({l.features});
            p.beta = Tensor({l.features});
            p.running_mean = Tensor({l.features});
            p.running_var = Tensor({l.features});
            for (double& v : p.gamma.data) v = 1.0;
            for (double& v : p.running_var.data) v = 1.0;
        }
    }
    return params;
}

namespace {

void elementwise_forward(const LayerSpec& l, const Tensor& x, Tensor& y) {
    y = x;
    switch (l.kind) {
        case LayerSpec::Kind::ReLU:
            for (double& v : y.data) v = v > 0.0 ? v : 0.0;
            break;
        case LayerSpec::Kind::LeakyReLU:
            for (double& v : y.data) v = v > 0.0 ? v : l.slope * v;
            break;
        case LayerSpec::Kind::Sigmoid:
            for (double& v : y.data) v = 1.0 / (1.0 + std::exp(-v));
            break;
        case LayerSpec::Kind::Tanh:
            for (double& v : y.data) v = std::tanh(v);
            break;
        default: break;
    }
}

// Mean/variance per feature. Rank 2 normalizes over the batch only, rank 4
// over batch and both spatial axes. One thread per feature keeps the
// accumulation order fixed.
void batch_moments(const Tensor& x, std::size_t features, Tensor& mean, Tensor& var) {
    mean = Tensor({features});
    var = Tensor({features});
    const std::size_t n = x.dim(0);
    if (x.rank() == 2) {
#pragma omp parallel for schedule(static) if (features * n >= 4096)
        for (std::size_t f = 0; f < features; ++f) {
            double m = 0.0;
            for (std::size_t r = 0; r < n; ++r) m += x.at2(r, f);
            m /= static_cast<double>(n);
            double v = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                const double d = x.at2(r, f) - m;
                v += d * d;
            }
            mean.data[f] = m;
            var.data[f] = v / static_cast<double>(n);
        }
    } else {
        const std::size_t hw = x.dim(2) * x.dim(3);
        const std::size_t count = n * hw;
#pragma omp parallel for schedule(static) if (features * count >= 4096)
        for (std::size_t f = 0; f < features; ++f) {
            double m = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                const double* plane = x.data.data() + (r * features + f) * hw;
                for (std::size_t i = 0; i < hw; ++i) m += plane[i];
            }
            m /= static_cast<double>(count);
            double v = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                const double* plane = x.data.data() + (r * features + f) * hw;
                for (std::size_t i = 0; i < hw; ++i) {
                    const double d = plane[i] - m;
                    v += d * d;
                }
            }
            mean.data[f] = m;
            var.data[f] = v / static_cast<double>(count);
        }
    }
}

void batchnorm_forward(const LayerSpec& l, const LayerParams& p, const Tensor& x, Mode mode,
                       Tape::Rec& rec, Tensor& y) {
    const std::size_t features = l.features;
    Tensor mean, var;
    if (mode == Mode::Train) {
        batch_moments(x, features, mean, var);
    } else {
        mean = p.running_mean;
        var = p.running_var;
    }
    rec.mean = mean;
    rec.var = var;
    rec.xhat = Tensor(x.shape);
    y = Tensor(x.shape);
    const std::size_t n = x.dim(0);
    const std::size_t hw = x.rank() == 4 ? x.dim(2) * x.dim(3) : 1;
#pragma omp parallel for schedule(static) if (features * n * hw >= 4096)
    for (std::size_t f = 0; f < features; ++f) {
        const double inv = 1.0 / std::sqrt(var.data[f] + kBnEps);
        const double m = mean.data[f];
        const double g = p.gamma.data[f], b = p.beta.data[f];
        for (std::size_t r = 0; r < n; ++r) {
            const std::size_t base =
                x.rank() == 4 ? (r * features + f) * hw : r * features + f;
            for (std::size_t i = 0; i < hw; ++i) {
                const double xh = (x.data[base + i] - m) * inv;
                rec.xhat.data[base + i] = xh;
                y.data[base + i] = g * xh + b;
            }
        }
    }
}

void batchnorm_backward(const LayerSpec& l, const LayerParams& p, const Tape::Rec& rec, Mode mode,
                        const Tensor& dy, LayerParams& grads, Tensor& dx) {
    const std::size_t features = l.features;
    const std::size_t n = dy.dim(0);
    const std::size_t hw = dy.rank() == 4 ? dy.dim(2) * dy.dim(3) : 1;
    const double count = static_cast<double>(n * hw);
    grads.gamma = Tensor({features});
    grads.beta = Tensor({features});
    dx = Tensor(dy.shape);
#pragma omp parallel for schedule(static) if (features * n * hw >= 4096)
    for (std::size_t f = 0; f < features; ++f) {
        const double inv = 1.0 / std::sqrt(rec.var.data[f] + kBnEps);
        const double g = p.gamma.data[f];
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const std::size_t base = dy.rank() == 4 ? (r * features + f) * hw : r * features + f;
            for (std::size_t i = 0; i < hw; ++i) {
                sum_dy += dy.data[base + i];
                sum_dy_xhat += dy.data[base + i] * rec.xhat.data[base + i];
            }
        }
        grads.beta.data[f] = sum_dy;
        grads.gamma.data[f] = sum_dy_xhat;
        for (std::size_t r = 0; r < n; ++r) {
            const std::size_t base = dy.rank() == 4 ? (r * features + f) * hw : r * features + f;
            for (std::size_t i = 0; i < hw; ++i) {
                if (mode == Mode::Train) {
                    dx.data[base + i] =
                        g * inv *
                        (dy.data[base + i] - sum_dy / count -
                         rec.xhat.data[base + i] * sum_dy_xhat / count);
                } else {
                    // Inference statistics are constants, so the map is affine.
                    dx.data[base + i] = g * inv * dy.data[base + i];
                }
            }
        }
    }
}

}  // namespace

Tape forward(const NetworkSpec& net, const ParameterSet& params, const Tensor& input, Mode mode) {
    net.validate();
    if (params.layers.size() != net.layers.size())
        throw ConsistencyError("parameter set does not match network spec");
    if (!input.all_finite()) throw NumericError("non-finite network input");

    Tape tape;
    tape.mode = mode;
    tape.signature = net.signature();
    tape.batch = input.rank() > 0 ? input.dim(0) : 0;
    tape.recs.resize(net.layers.size());

    Tensor current = input;
    std::vector<std::size_t> shape = input.shape;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& l = net.layers[i];
        const LayerParams& p = params.layers[i];
        tape.recs[i].input_shape = current.shape;
        shape = layer_output_shape(l, shape, i);  // validates
        Tensor next;
        switch (l.kind) {
            case LayerSpec::Kind::Dense:
                tape.recs[i].input = current;
                kernels::dense_forward(current, p.weight, p.bias, next);
                break;
            case LayerSpec::Kind::ConvStride2:
            case LayerSpec::Kind::ConvStride1:
                tape.recs[i].input = current;
                kernels::conv2d_forward(current, p.weight, p.bias, l.conv_stride(), next);
                break;
            case LayerSpec::Kind::ConvUpsample2: {
                tape.recs[i].input = current;
                Tensor conv_out;
                kernels::conv2d_forward(current, p.weight, p.bias, 1, conv_out);
                kernels::upsample2_forward(conv_out, next);
                break;
            }
            case LayerSpec::Kind::BatchNorm:
                batchnorm_forward(l, p, current, mode, tape.recs[i], next);
                break;
            case LayerSpec::Kind::Reshape:
                next = current;
                next.shape = shape;
                break;
            default:
                tape.recs[i].input = current;
                elementwise_forward(l, current, next);
                if (l.kind == LayerSpec::Kind::Sigmoid || l.kind == LayerSpec::Kind::Tanh)
                    tape.recs[i].output = next;
                break;
        }
        if (!next.all_finite())
            throw NumericError("non-finite activation after layer " + std::to_string(i) + " (" +
                               l.name() + ")");
        current = std::move(next);
    }
    tape.output = std::move(current);
    return tape;
}

Gradients backward(const NetworkSpec& net, const ParameterSet& params, const Tape& tape,
                   const Tensor& output_grad) {
    if (tape.signature != net.signature() || tape.recs.size() != net.layers.size())
        throw ConsistencyError("tape does not belong to this network");
    if (!output_grad.same_shape(tape.output))
        throw DimensionError("output gradient shape " + shape_string(output_grad.shape) +
                             " does not match network output " + shape_string(tape.output.shape));

    Gradients grads;
    grads.layers.resize(net.layers.size());
    Tensor dy = output_grad;
    for (std::size_t idx = net.layers.size(); idx-- > 0;) {
        const LayerSpec& l = net.layers[idx];
        const LayerParams& p = params.layers[idx];
        const Tape::Rec& rec = tape.recs[idx];
        Tensor dx;
        switch (l.kind) {
            case LayerSpec::Kind::Dense:
                kernels::dense_backward_params(dy, rec.input, grads.layers[idx].weight,
                                               grads.layers[idx].bias);
                kernels::dense_backward_input(dy, p.weight, dx);
                if (!l.use_bias) grads.layers[idx].bias = Tensor();
                break;
            case LayerSpec::Kind::ConvStride2:
            case LayerSpec::Kind::ConvStride1:
                grads.layers[idx].weight = Tensor(p.weight.shape);
                kernels::conv2d_backward_params(dy, rec.input, l.conv_stride(),
                                                grads.layers[idx].weight, grads.layers[idx].bias);
                kernels::conv2d_backward_input(dy, p.weight, l.conv_stride(), rec.input.shape, dx);
                if (!l.use_bias) grads.layers[idx].bias = Tensor();
                break;
            case LayerSpec::Kind::ConvUpsample2: {
                std::vector<std::size_t> conv_shape = {dy.dim(0), dy.dim(1), dy.dim(2) / 2,
                                                       dy.dim(3) / 2};
                Tensor dconv;
                kernels::upsample2_backward(dy, conv_shape, dconv);
                grads.layers[idx].weight = Tensor(p.weight.shape);
                kernels::conv2d_backward_params(dconv, rec.input, 1, grads.layers[idx].weight,
                                                grads.layers[idx].bias);
                kernels::conv2d_backward_input(dconv, p.weight, 1, rec.input.shape, dx);
                if (!l.use_bias) grads.layers[idx].bias = Tensor();
                break;
            }
            case LayerSpec::Kind::BatchNorm:
                batchnorm_backward(l, p, rec, tape.mode, dy, grads.layers[idx], dx);
                break;
            case LayerSpec::Kind::Reshape:
                dx = dy;
                dx.shape = rec.input_shape;
                break;
            case LayerSpec::Kind::ReLU: {
                dx = Tensor(rec.input.shape);
                for (std::size_t i = 0; i < dx.numel(); ++i)
                    dx.data[i] = rec.input.data[i] > 0.0 ? dy.data[i] : 0.0;
                break;
            }
            case LayerSpec::Kind::LeakyReLU: {
                dx = Tensor(rec.input.shape);
                for (std::size_t i = 0; i < dx.numel(); ++i)
                    dx.data[i] = rec.input.data[i] > 0.0 ? dy.data[i] : l.slope * dy.data[i];
                break;
            }
            case LayerSpec::Kind::Sigmoid: {
                dx = Tensor(rec.input.shape);
                for (std::size_t i = 0; i < dx.numel(); ++i) {
                    const double y = rec.output.data[i];
                    dx.data[i] = dy.data[i] * y * (1.0 - y);
                }
                break;
            }
            case LayerSpec::Kind::Tanh: {
                dx = Tensor(rec.input.shape);
                for (std::size_t i = 0; i < dx.numel(); ++i) {
                    const double y = rec.output.data[i];
                    dx.data[i] = dy.data[i] * (1.0 - y * y);
                }
                break;
            }
        }
        dy = std::move(dx);
    }
    grads.input = std::move(dy);
    return grads;
}

void commit_batchnorm_stats(const NetworkSpec& net, ParameterSet& params, const Tape& tape,
                            double momentum) {
    if (tape.mode != Mode::Train) return;
    if (tape.signature != net.signature())
        throw ConsistencyError("tape does not belong to this network");
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (net.layers[i].kind != LayerSpec::Kind::BatchNorm) continue;
        LayerParams& p = params.layers[i];
        const Tape::Rec& rec = tape.recs[i];
        for (std::size_t f = 0; f < p.running_mean.numel(); ++f) {
            p.running_mean.data[f] =
                momentum * p.running_mean.data[f] + (1.0 - momentum) * rec.mean.data[f];
            p.running_var.data[f] =
                momentum * p.running_var.data[f] + (1.0 - momentum) * rec.var.data[f];
        }
    }
}

std::size_t parameter_count(const ParameterSet& params) {
    std::size_t n = 0;
    for (const auto& layer : params.layers)
        n += layer.weight.numel() + layer.bias.numel() + layer.gamma.numel() + layer.beta.numel();
    return n;
}

}  // namespace pigan
