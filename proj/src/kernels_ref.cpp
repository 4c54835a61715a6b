#include "pigan/kernels.hpp"

// Serial reference kernels. Deliberately naive: direct transcription of the
// defining sums (and scatter form for the convolution backward passes, the
// opposite of the gather form used by the parallel path) so the two
// implementations cross-check each other in the tests.

namespace pigan::kernels::ref {

void dense_forward(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& y) {
    check_dense_shapes(x, w, b);
    const std::size_t m = x.dim(0), in = x.dim(1), out = w.dim(0);
    y = Tensor({m, out});
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t o = 0; o < out; ++o) {
            double acc = b.numel() ? b.data[o] : 0.0;
            for (std::size_t i = 0; i < in; ++i) acc += x.at2(r, i) * w.at2(o, i);
            y.at2(r, o) = acc;
        }
}

void dense_backward_input(const Tensor& dy, const Tensor& w, Tensor& dx) {
    const std::size_t m = dy.dim(0), out = dy.dim(1), in = w.dim(1);
    dx = Tensor({m, in});
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t i = 0; i < in; ++i) {
            double acc = 0.0;
            for (std::size_t o = 0; o < out; ++o) acc += dy.at2(r, o) * w.at2(o, i);
            dx.at2(r, i) = acc;
        }
}

void dense_backward_params(const Tensor& dy, const Tensor& x, Tensor& dw, Tensor& db) {
    const std::size_t m = dy.dim(0), out = dy.dim(1), in = x.dim(1);
    dw = Tensor({out, in});
    db = Tensor({out});
    for (std::size_t o = 0; o < out; ++o)
        for (std::size_t i = 0; i < in; ++i) {
            double acc = 0.0;
            for (std::size_t r = 0; r < m; ++r) acc += dy.at2(r, o) * x.at2(r, i);
            dw.at2(o, i) = acc;
        }
    for (std::size_t o = 0; o < out; ++o) {
        double acc = 0.0;
        for (std::size_t r = 0; r < m; ++r) acc += dy.at2(r, o);
        db.data[o] = acc;
    }
}

void conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride,
                    Tensor& y) {
    check_conv_shapes(x, w, b, stride);
    const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const std::size_t cout = w.dim(0), k = w.dim(2);
    const long pad = static_cast<long>((k - 1) / 2);
    const std::size_t ho = conv_out_size(h, k, stride), wo = conv_out_size(wd, k, stride);
    y = Tensor({n, cout, ho, wo});
    for (std::size_t img = 0; img < n; ++img)
        for (std::size_t co = 0; co < cout; ++co)
            for (std::size_t oy = 0; oy < ho; ++oy)
                for (std::size_t ox = 0; ox < wo; ++ox) {
                    double acc = b.numel() ? b.data[co] : 0.0;
                    for (std::size_t ci = 0; ci < cin; ++ci)
                        for (std::size_t ky = 0; ky < k; ++ky)
                            for (std::size_t kx = 0; kx < k; ++kx) {
                                const long iy = static_cast<long>(oy * stride + ky) - pad;
                                const long ix = static_cast<long>(ox * stride + kx) - pad;
                                if (iy < 0 || iy >= static_cast<long>(h) || ix < 0 ||
                                    ix >= static_cast<long>(wd))
                                    continue;
                                acc += x.at4(img, ci, static_cast<std::size_t>(iy),
                                             static_cast<std::size_t>(ix)) *
                                       w.at4(co, ci, ky, kx);
                            }
                    y.at4(img, co, oy, ox) = acc;
                }
}

void conv2d_backward_input(const Tensor& dy, const Tensor& w, std::size_t stride,
                           const std::vector<std::size_t>& input_shape, Tensor& dx) {
    const std::size_t n = input_shape[0], cin = input_shape[1], h = input_shape[2],
                      wd = input_shape[3];
    const std::size_t cout = w.dim(0), k = w.dim(2);
    const long pad = static_cast<long>((k - 1) / 2);
    const std::size_t ho = dy.dim(2), wo = dy.dim(3);
    dx = Tensor(input_shape);
    for (std::size_t img = 0; img < n; ++img)
        for (std::size_t co = 0; co < cout; ++co)
            for (std::size_t oy = 0; oy < ho; ++oy)
                for (std::size_t ox = 0; ox < wo; ++ox) {
                    const double g = dy.at4(img, co, oy, ox);
                    for (std::size_t ci = 0; ci < cin; ++ci)
                        for (std::size_t ky = 0; ky < k; ++ky)
                            for (std::size_t kx = 0; kx < k; ++kx) {
                                const long iy = static_cast<long>(oy * stride + ky) - pad;
                                const long ix = static_cast<long>(ox * stride + kx) - pad;
                                if (iy < 0 || iy >= static_cast<long>(h) || ix < 0 ||
                                    ix >= static_cast<long>(wd))
                                    continue;
                                dx.at4(img, ci, static_cast<std::size_t>(iy),
                                       static_cast<std::size_t>(ix)) += g * w.at4(co, ci, ky, kx);
                            }
                }
}

void conv2d_backward_params(const Tensor& dy, const Tensor& x, std::size_t stride, Tensor& dw,
                            Tensor& db) {
    const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const std::size_t cout = dy.dim(1), ho = dy.dim(2), wo = dy.dim(3);
    if (dw.rank() != 4) throw DimensionError("dw must be preallocated with the kernel shape");
    const std::size_t k = dw.dim(2);
    const long pad = static_cast<long>((k - 1) / 2);
    for (double& v : dw.data) v = 0.0;
    db = Tensor({cout});
    for (std::size_t co = 0; co < cout; ++co)
        for (std::size_t ci = 0; ci < cin; ++ci)
            for (std::size_t ky = 0; ky < k; ++ky)
                for (std::size_t kx = 0; kx < k; ++kx) {
                    double acc = 0.0;
                    for (std::size_t img = 0; img < n; ++img)
                        for (std::size_t oy = 0; oy < ho; ++oy)
                            for (std::size_t ox = 0; ox < wo; ++ox) {
                                const long iy = static_cast<long>(oy * stride + ky) - pad;
                                const long ix = static_cast<long>(ox * stride + kx) - pad;
                                if (iy < 0 || iy >= static_cast<long>(h) || ix < 0 ||
                                    ix >= static_cast<long>(wd))
                                    continue;
                                acc += dy.at4(img, co, oy, ox) *
                                       x.at4(img, ci, static_cast<std::size_t>(iy),
                                             static_cast<std::size_t>(ix));
                            }
                    dw.at4(co, ci, ky, kx) = acc;
                }
    for (std::size_t co = 0; co < cout; ++co) {
        double acc = 0.0;
        for (std::size_t img = 0; img < n; ++img)
            for (std::size_t oy = 0; oy < ho; ++oy)
                for (std::size_t ox = 0; ox < wo; ++ox) acc += dy.at4(img, co, oy, ox);
        db.data[co] = acc;
    }
}

namespace {
double source_coord(std::size_t out_index, std::size_t in_size) {
    if (in_size == 1) return 0.0;
    return static_cast<double>(out_index) * static_cast<double>(in_size - 1) /
           static_cast<double>(2 * in_size - 1);
}
}  // namespace

void upsample2_forward(const Tensor& x, Tensor& y) {
    if (x.rank() != 4) throw DimensionError("upsample input must be rank 4");
    const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    y = Tensor({n, c, 2 * h, 2 * w});
    for (std::size_t img = 0; img < n; ++img)
        for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t oy = 0; oy < 2 * h; ++oy)
                for (std::size_t ox = 0; ox < 2 * w; ++ox) {
                    const double sy = source_coord(oy, h), sx = source_coord(ox, w);
                    const std::size_t y0 = static_cast<std::size_t>(sy);
                    const std::size_t x0 = static_cast<std::size_t>(sx);
                    const std::size_t y1 = std::min(y0 + 1, h - 1);
                    const std::size_t x1 = std::min(x0 + 1, w - 1);
                    const double fy = sy - static_cast<double>(y0);
                    const double fx = sx - static_cast<double>(x0);
                    const double top =
                        x.at4(img, ch, y0, x0) * (1.0 - fx) + x.at4(img, ch, y0, x1) * fx;
                    const double bot =
                        x.at4(img, ch, y1, x0) * (1.0 - fx) + x.at4(img, ch, y1, x1) * fx;
                    y.at4(img, ch, oy, ox) = top * (1.0 - fy) + bot * fy;
                }
}

void upsample2_backward(const Tensor& dy, const std::vector<std::size_t>& input_shape, Tensor& dx) {
    const std::size_t n = input_shape[0], c = input_shape[1], h = input_shape[2],
                      w = input_shape[3];
    dx = Tensor(input_shape);
    for (std::size_t img = 0; img < n; ++img)
        for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t oy = 0; oy < 2 * h; ++oy)
                for (std::size_t ox = 0; ox < 2 * w; ++ox) {
                    const double sy = source_coord(oy, h), sx = source_coord(ox, w);
                    const std::size_t y0 = static_cast<std::size_t>(sy);
                    const std::size_t x0 = static_cast<std::size_t>(sx);
                    const std::size_t y1 = std::min(y0 + 1, h - 1);
                    const std::size_t x1 = std::min(x0 + 1, w - 1);
                    const double fy = sy - static_cast<double>(y0);
                    const double fx = sx - static_cast<double>(x0);
                    const double g = dy.at4(img, ch, oy, ox);
                    dx.at4(img, ch, y0, x0) += g * (1.0 - fy) * (1.0 - fx);
                    dx.at4(img, ch, y0, x1) += g * (1.0 - fy) * fx;
                    dx.at4(img, ch, y1, x0) += g * fy * (1.0 - fx);
                    dx.at4(img, ch, y1, x1) += g * fy * fx;
                }
}

}  // namespace pigan::kernels::ref
