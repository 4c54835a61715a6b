#include "pigan/kernels.hpp"

namespace pigan::kernels {

std::size_t conv_out_size(std::size_t in, std::size_t kernel, std::size_t stride) {
    const std::size_t pad = (kernel - 1) / 2;
    return (in + 2 * pad - kernel) / stride + 1;
}

void check_dense_shapes(const Tensor& x, const Tensor& w, const Tensor& b) {
    if (x.rank() != 2) throw DimensionError("dense input must be rank 2, got " + shape_string(x.shape));
    if (w.rank() != 2) throw DimensionError("dense weight must be rank 2");
    if (x.dim(1) != w.dim(1))
        throw DimensionError("dense input features " + std::to_string(x.dim(1)) +
                             " do not match weight columns " + std::to_string(w.dim(1)));
    if (b.numel() && (b.rank() != 1 || b.dim(0) != w.dim(0)))
        throw DimensionError("dense bias length does not match output features");
}

void check_conv_shapes(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride) {
    if (x.rank() != 4) throw DimensionError("conv input must be rank 4, got " + shape_string(x.shape));
    if (w.rank() != 4) throw DimensionError("conv weight must be rank 4");
    if (stride != 1 && stride != 2) throw ArgumentError("conv stride must be 1 or 2");
    if (w.dim(2) != w.dim(3) || w.dim(2) % 2 == 0)
        throw DimensionError("conv kernels must be square with odd size");
    if (x.dim(1) != w.dim(1))
        throw DimensionError("conv input channels " + std::to_string(x.dim(1)) +
                             " do not match weight channels " + std::to_string(w.dim(1)));
    if (b.numel() && (b.rank() != 1 || b.dim(0) != w.dim(0)))
        throw DimensionError("conv bias length does not match output channels");
}

void dense_forward(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& y) {
    check_dense_shapes(x, w, b);
    const std::size_t m = x.dim(0), in = x.dim(1), out = w.dim(0);
    y = Tensor({m, out});
    const double* xd = x.data.data();
    const double* wd = w.data.data();
    const double* bd = b.numel() ? b.data.data() : nullptr;
    double* yd = y.data.data();
#pragma omp parallel for schedule(static) if (m * out >= 2048)
    for (std::size_t r = 0; r < m; ++r) {
        const double* xrow = xd + r * in;
        double* yrow = yd + r * out;
        for (std::size_t o = 0; o < out; ++o) {
            const double* wrow = wd + o * in;
            double acc = bd ? bd[o] : 0.0;
            for (std::size_t i = 0; i < in; ++i) acc += xrow[i] * wrow[i];
            yrow[o] = acc;
        }
    }
}

void dense_backward_input(const Tensor& dy, const Tensor& w, Tensor& dx) {
    const std::size_t m = dy.dim(0), out = dy.dim(1), in = w.dim(1);
    dx = Tensor({m, in});
    const double* dyd = dy.data.data();
    const double* wd = w.data.data();
    double* dxd = dx.data.data();
#pragma omp parallel for schedule(static) if (m * in >= 2048)
    for (std::size_t r = 0; r < m; ++r) {
        const double* dyrow = dyd + r * out;
        double* dxrow = dxd + r * in;
        for (std::size_t o = 0; o < out; ++o) {
            const double g = dyrow[o];
            const double* wrow = wd + o * in;
            for (std::size_t i = 0; i < in; ++i) dxrow[i] += g * wrow[i];
        }
    }
}

void dense_backward_params(const Tensor& dy, const Tensor& x, Tensor& dw, Tensor& db) {
    const std::size_t m = dy.dim(0), out = dy.dim(1), in = x.dim(1);
    dw = Tensor({out, in});
    db = Tensor({out});
    const double* dyd = dy.data.data();
    const double* xd = x.data.data();
    double* dwd = dw.data.data();
    double* dbd = db.data.data();
#pragma omp parallel for schedule(static) if (out * in >= 2048)
    for (std::size_t o = 0; o < out; ++o) {
        double* dwrow = dwd + o * in;
        double bacc = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
            const double g = dyd[r * out + o];
            bacc += g;
            const double* xrow = xd + r * in;
            for (std::size_t i = 0; i < in; ++i) dwrow[i] += g * xrow[i];
        }
        dbd[o] = bacc;
    }
}

namespace {

// im2col scratch: rows are (ci,ky,kx) patch coordinates, columns are output
// positions. Out-of-image taps are zero (matching the zero padding).
void fill_columns(const double* xplane_base, std::size_t cin, std::size_t h, std::size_t w,
                  std::size_t k, std::size_t stride, std::size_t ho, std::size_t wo,
                  double* cols) {
    const std::size_t pad = (k - 1) / 2;
    const std::size_t positions = ho * wo;
    std::size_t row = 0;
    for (std::size_t ci = 0; ci < cin; ++ci) {
        const double* xplane = xplane_base + ci * h * w;
        for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx, ++row) {
                double* dst = cols + row * positions;
                for (std::size_t oy = 0; oy < ho; ++oy) {
                    const std::size_t iy = oy * stride + ky;
                    double* out_row = dst + oy * wo;
                    if (iy < pad || iy >= h + pad) {
                        for (std::size_t ox = 0; ox < wo; ++ox) out_row[ox] = 0.0;
                        continue;
                    }
                    const double* xrow = xplane + (iy - pad) * w;
                    for (std::size_t ox = 0; ox < wo; ++ox) {
                        const std::size_t ix = ox * stride + kx;
                        out_row[ox] = (ix < pad || ix >= w + pad) ? 0.0 : xrow[ix - pad];
                    }
                }
            }
        }
    }
}

}  // namespace

void conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride,
                    Tensor& y) {
    check_conv_shapes(x, w, b, stride);
    const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const std::size_t cout = w.dim(0), k = w.dim(2);
    const std::size_t ho = conv_out_size(h, k, stride), wo = conv_out_size(wd, k, stride);
    const std::size_t positions = ho * wo, rows = cin * k * k;
    y = Tensor({n, cout, ho, wo});
    const double* wgt = w.data.data();
    const double* bd = b.numel() ? b.data.data() : nullptr;

#pragma omp parallel if (n * cout * positions >= 4096)
    {
        std::vector<double> cols(rows * positions);
#pragma omp for schedule(static)
        for (std::size_t img = 0; img < n; ++img) {
            fill_columns(x.data.data() + img * cin * h * wd, cin, h, wd, k, stride, ho, wo,
                         cols.data());
            for (std::size_t co = 0; co < cout; ++co) {
                double* yrow = y.data.data() + (img * cout + co) * positions;
                const double init = bd ? bd[co] : 0.0;
                for (std::size_t p = 0; p < positions; ++p) yrow[p] = init;
                const double* wrow = wgt + co * rows;
                for (std::size_t r = 0; r < rows; ++r) {
                    const double wv = wrow[r];
                    const double* crow = cols.data() + r * positions;
                    for (std::size_t p = 0; p < positions; ++p) yrow[p] += wv * crow[p];
                }
            }
        }
    }
}

void conv2d_backward_input(const Tensor& dy, const Tensor& w, std::size_t stride,
                           const std::vector<std::size_t>& input_shape, Tensor& dx) {
    const std::size_t n = input_shape[0], cin = input_shape[1], h = input_shape[2],
                      wd = input_shape[3];
    const std::size_t cout = w.dim(0), k = w.dim(2);
    const std::size_t pad = (k - 1) / 2;
    const std::size_t ho = dy.dim(2), wo = dy.dim(3);
    const std::size_t positions = ho * wo, rows = cin * k * k;
    dx = Tensor(input_shape);
    const double* wgt = w.data.data();

#pragma omp parallel if (n * cin * h * wd >= 4096)
    {
        std::vector<double> dcols(rows * positions);
#pragma omp for schedule(static)
        for (std::size_t img = 0; img < n; ++img) {
            // dcols = W^T * dy, then scatter patches back onto the image
            for (std::size_t r = 0; r < rows; ++r) {
                double* drow = dcols.data() + r * positions;
                for (std::size_t p = 0; p < positions; ++p) drow[p] = 0.0;
            }
            for (std::size_t co = 0; co < cout; ++co) {
                const double* dyrow = dy.data.data() + (img * cout + co) * positions;
                const double* wrow = wgt + co * rows;
                for (std::size_t r = 0; r < rows; ++r) {
                    const double wv = wrow[r];
                    double* drow = dcols.data() + r * positions;
                    for (std::size_t p = 0; p < positions; ++p) drow[p] += wv * dyrow[p];
                }
            }
            double* dxbase = dx.data.data() + img * cin * h * wd;
            std::size_t row = 0;
            for (std::size_t ci = 0; ci < cin; ++ci) {
                double* dxplane = dxbase + ci * h * wd;
                for (std::size_t ky = 0; ky < k; ++ky)
                    for (std::size_t kx = 0; kx < k; ++kx, ++row) {
                        const double* drow = dcols.data() + row * positions;
                        for (std::size_t oy = 0; oy < ho; ++oy) {
                            const std::size_t iy = oy * stride + ky;
                            if (iy < pad || iy >= h + pad) continue;
                            double* dxrow = dxplane + (iy - pad) * wd;
                            for (std::size_t ox = 0; ox < wo; ++ox) {
                                const std::size_t ix = ox * stride + kx;
                                if (ix < pad || ix >= wd + pad) continue;
                                dxrow[ix - pad] += drow[oy * wo + ox];
                            }
                        }
                    }
            }
        }
    }
}

void conv2d_backward_params(const Tensor& dy, const Tensor& x, std::size_t stride, Tensor& dw,
                            Tensor& db) {
    const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const std::size_t cout = dy.dim(1), ho = dy.dim(2), wo = dy.dim(3);
    if (dw.rank() != 4) throw DimensionError("dw must be preallocated with the kernel shape");
    const std::size_t k = dw.dim(2);
    const std::size_t positions = ho * wo, rows = cin * k * k;
    db = Tensor({cout});

    // One shared scratch holding the patch matrix for the whole batch keeps
    // the accumulation order over (img, position) fixed per weight entry.
    std::vector<double> cols(n * rows * positions);
#pragma omp parallel for schedule(static) if (n * rows * positions >= 8192)
    for (std::size_t img = 0; img < n; ++img)
        fill_columns(x.data.data() + img * cin * h * wd, cin, h, wd, k, stride, ho, wo,
                     cols.data() + img * rows * positions);

    double* dwd = dw.data.data();
    double* dbd = db.data.data();
#pragma omp parallel for schedule(static) if (cout * rows >= 64)
    for (std::size_t co = 0; co < cout; ++co) {
        double* dwrow = dwd + co * rows;
        for (std::size_t r = 0; r < rows; ++r) dwrow[r] = 0.0;
        double bacc = 0.0;
        for (std::size_t img = 0; img < n; ++img) {
            const double* dyrow = dy.data.data() + (img * cout + co) * positions;
            const double* cbase = cols.data() + img * rows * positions;
            for (std::size_t p = 0; p < positions; ++p) bacc += dyrow[p];
            for (std::size_t r = 0; r < rows; ++r) {
                const double* crow = cbase + r * positions;
                double acc = 0.0;
                for (std::size_t p = 0; p < positions; ++p) acc += dyrow[p] * crow[p];
                dwrow[r] += acc;
            }
        }
        dbd[co] = bacc;
    }
}

namespace {

struct Lerp1D {
    std::vector<std::size_t> lo, hi;
    std::vector<double> frac;
};

// Corner-aligned source coordinates for a doubled axis.
Lerp1D upsample2_axis(std::size_t in) {
    const std::size_t out = 2 * in;
    Lerp1D t;
    t.lo.resize(out);
    t.hi.resize(out);
    t.frac.resize(out);
    for (std::size_t o = 0; o < out; ++o) {
        const double src = in == 1 ? 0.0
                                   : static_cast<double>(o) * static_cast<double>(in - 1) /
                                         static_cast<double>(out - 1);
        const std::size_t lo = static_cast<std::size_t>(src);
        t.lo[o] = lo;
        t.hi[o] = lo + 1 < in ? lo + 1 : in - 1;
        t.frac[o] = src - static_cast<double>(lo);
    }
    return t;
}

}  // namespace

void upsample2_forward(const Tensor& x, Tensor& y) {
    if (x.rank() != 4) throw DimensionError("upsample input must be rank 4");
    const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    y = Tensor({n, c, 2 * h, 2 * w});
    const Lerp1D ty = upsample2_axis(h), tx = upsample2_axis(w);
    const double* xd = x.data.data();
    double* yd = y.data.data();
    const std::size_t planes = n * c;
#pragma omp parallel for schedule(static) if (planes * h * w >= 1024)
    for (std::size_t p = 0; p < planes; ++p) {
        const double* xp = xd + p * h * w;
        double* yp = yd + p * 4 * h * w;
        for (std::size_t oy = 0; oy < 2 * h; ++oy) {
            const std::size_t y0 = ty.lo[oy], y1 = ty.hi[oy];
            const double fy = ty.frac[oy];
            for (std::size_t ox = 0; ox < 2 * w; ++ox) {
                const std::size_t x0 = tx.lo[ox], x1 = tx.hi[ox];
                const double fx = tx.frac[ox];
                const double top = xp[y0 * w + x0] * (1.0 - fx) + xp[y0 * w + x1] * fx;
                const double bot = xp[y1 * w + x0] * (1.0 - fx) + xp[y1 * w + x1] * fx;
                yp[oy * 2 * w + ox] = top * (1.0 - fy) + bot * fy;
            }
        }
    }
}

void upsample2_backward(const Tensor& dy, const std::vector<std::size_t>& input_shape, Tensor& dx) {
    const std::size_t n = input_shape[0], c = input_shape[1], h = input_shape[2],
                      w = input_shape[3];
    dx = Tensor(input_shape);
    const Lerp1D ty = upsample2_axis(h), tx = upsample2_axis(w);
    const double* dyd = dy.data.data();
    double* dxd = dx.data.data();
    const std::size_t planes = n * c;
    // Scatter is plane-local: one thread owns a whole plane, so accumulation
    // order inside the plane is fixed and results stay bitwise reproducible.
#pragma omp parallel for schedule(static) if (planes * h * w >= 1024)
    for (std::size_t p = 0; p < planes; ++p) {
        const double* dyp = dyd + p * 4 * h * w;
        double* dxp = dxd + p * h * w;
        for (std::size_t oy = 0; oy < 2 * h; ++oy) {
            const std::size_t y0 = ty.lo[oy], y1 = ty.hi[oy];
            const double fy = ty.frac[oy];
            for (std::size_t ox = 0; ox < 2 * w; ++ox) {
                const std::size_t x0 = tx.lo[ox], x1 = tx.hi[ox];
                const double fx = tx.frac[ox];
                const double g = dyp[oy * 2 * w + ox];
                dxp[y0 * w + x0] += g * (1.0 - fy) * (1.0 - fx);
                dxp[y0 * w + x1] += g * (1.0 - fy) * fx;
                dxp[y1 * w + x0] += g * fy * (1.0 - fx);
                dxp[y1 * w + x1] += g * fy * fx;
            }
        }
    }
}

}  // namespace pigan::kernels
