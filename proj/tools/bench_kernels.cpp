// Compares the OpenMP kernels against the serial reference implementations:
// wall time, speedup, and the largest elementwise deviation.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include "pigan/common.hpp"
#include "pigan/kernels.hpp"

using namespace pigan;
using Clock = std::chrono::steady_clock;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, RandomStream& rng) {
    Tensor t(std::move(shape));
    for (double& v : t.data) v = rng.normal();
    return t;
}

double time_ms(const std::function<void()>& fn, int repeats) {
    fn();  // warm up
    const auto start = Clock::now();
    for (int r = 0; r < repeats; ++r) fn();
    const auto stop = Clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() / repeats;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i)
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

void report(const char* name, double serial_ms, double parallel_ms, double diff) {
    std::printf("%-28s serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx   max|diff| %.3e\n",
                name, serial_ms, parallel_ms, serial_ms / parallel_ms, diff);
}

}  // namespace

int main() {
    RandomStream rng(11);
    const int reps = 20;

    {
        const Tensor x = random_tensor({128, 100}, rng);
        const Tensor w = random_tensor({2048, 100}, rng);
        const Tensor b = random_tensor({2048}, rng);
        Tensor ys, yp;
        const double ts = time_ms([&] { kernels::ref::dense_forward(x, w, b, ys); }, reps);
        const double tp = time_ms([&] { kernels::dense_forward(x, w, b, yp); }, reps);
        report("dense_forward 128x100->2048", ts, tp, max_abs_diff(ys, yp));
    }
    {
        const Tensor x = random_tensor({64, 128, 4, 4}, rng);
        const Tensor w = random_tensor({32, 128, 3, 3}, rng);
        const Tensor b = random_tensor({32}, rng);
        Tensor ys, yp;
        const double ts = time_ms([&] { kernels::ref::conv2d_forward(x, w, b, 1, ys); }, reps);
        const double tp = time_ms([&] { kernels::conv2d_forward(x, w, b, 1, yp); }, reps);
        report("conv s1 128->32 @4x4 b64", ts, tp, max_abs_diff(ys, yp));

        Tensor dws(w.shape), dwp(w.shape), dbs, dbp;
        const double ts2 =
            time_ms([&] { kernels::ref::conv2d_backward_params(ys, x, 1, dws, dbs); }, reps);
        const double tp2 =
            time_ms([&] { kernels::conv2d_backward_params(yp, x, 1, dwp, dbp); }, reps);
        report("conv s1 backward_params", ts2, tp2, max_abs_diff(dws, dwp));

        Tensor dxs, dxp;
        const double ts3 =
            time_ms([&] { kernels::ref::conv2d_backward_input(ys, w, 1, x.shape, dxs); }, reps);
        const double tp3 =
            time_ms([&] { kernels::conv2d_backward_input(yp, w, 1, x.shape, dxp); }, reps);
        report("conv s1 backward_input", ts3, tp3, max_abs_diff(dxs, dxp));
    }
    {
        const Tensor x = random_tensor({64, 1, 16, 16}, rng);
        const Tensor w = random_tensor({16, 1, 3, 3}, rng);
        const Tensor b = random_tensor({16}, rng);
        Tensor ys, yp;
        const double ts = time_ms([&] { kernels::ref::conv2d_forward(x, w, b, 2, ys); }, reps);
        const double tp = time_ms([&] { kernels::conv2d_forward(x, w, b, 2, yp); }, reps);
        report("conv s2 1->16 @16x16 b64", ts, tp, max_abs_diff(ys, yp));
    }
    {
        const Tensor x = random_tensor({64, 32, 8, 8}, rng);
        Tensor ys, yp;
        const double ts = time_ms([&] { kernels::ref::upsample2_forward(x, ys); }, reps);
        const double tp = time_ms([&] { kernels::upsample2_forward(x, yp); }, reps);
        report("upsample2 32ch 8->16 b64", ts, tp, max_abs_diff(ys, yp));
    }
    return 0;
}
