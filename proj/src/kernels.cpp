#include "cotrain/kernels.hpp"

#include <atomic>
#include <cstdint>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace cotrain::kernels {

namespace {

std::atomic<Backend> g_backend{Backend::openmp};

// Below this many multiply-adds the thread fork costs more than it saves.
constexpr std::size_t kParallelThreshold = 1 << 14;

// Each helper owns one output row and sums its terms in ascending index
// order, so a row's result does not depend on which thread computes it.

// y[r,:] = b + sum_i x[r,i] * wt[i,:]   (wt = w transposed, [in x out])
inline void forward_row(const LinearDims& d, const double* x, const double* wt, const double* b,
                        double* y, std::size_t r) {
    const double* xr = x + r * d.in;
    double* yr = y + r * d.out;
    for (std::size_t o = 0; o < d.out; ++o) yr[o] = b[o];
    for (std::size_t i = 0; i < d.in; ++i) {
        const double xi = xr[i];
        const double* wi = wt + i * d.out;
        for (std::size_t o = 0; o < d.out; ++o) yr[o] += xi * wi[o];
    }
}

// dx[r,:] += sum_o dy[r,o] * w[o,:]
inline void input_grad_row(const LinearDims& d, const double* dy, const double* w, double* dx,
                           double* scratch, std::size_t r) {
    const double* dyr = dy + r * d.out;
    for (std::size_t i = 0; i < d.in; ++i) scratch[i] = 0.0;
    for (std::size_t o = 0; o < d.out; ++o) {
        const double g = dyr[o];
        const double* wo = w + o * d.in;
        for (std::size_t i = 0; i < d.in; ++i) scratch[i] += g * wo[i];
    }
    double* dxr = dx + r * d.in;
    for (std::size_t i = 0; i < d.in; ++i) dxr[i] += scratch[i];
}

// dw[o,:] += sum_r dy[r,o] * x[r,:];  db[o] += sum_r dy[r,o]
inline void param_grad_row(const LinearDims& d, const double* dy, const double* x, double* dw,
                           double* db, double* scratch, std::size_t o) {
    double bias = 0.0;
    for (std::size_t i = 0; i < d.in; ++i) scratch[i] = 0.0;
    for (std::size_t r = 0; r < d.batch; ++r) {
        const double g = dy[r * d.out + o];
        const double* xr = x + r * d.in;
        for (std::size_t i = 0; i < d.in; ++i) scratch[i] += g * xr[i];
        bias += g;
    }
    double* dwo = dw + o * d.in;
    for (std::size_t i = 0; i < d.in; ++i) dwo[i] += scratch[i];
    db[o] += bias;
}

std::vector<double> transpose(const LinearDims& d, std::span<const double> w) {
    std::vector<double> wt(d.in * d.out);
    for (std::size_t o = 0; o < d.out; ++o)
        for (std::size_t i = 0; i < d.in; ++i) wt[i * d.out + o] = w[o * d.in + i];
    return wt;
}

}  // namespace

void set_backend(Backend b) noexcept { g_backend.store(b); }
Backend backend() noexcept { return g_backend.load(); }

namespace serial {

void linear_forward(LinearDims d, std::span<const double> x, std::span<const double> w,
                    std::span<const double> b, std::span<double> y) {
    const auto wt = transpose(d, w);
    for (std::size_t r = 0; r < d.batch; ++r) forward_row(d, x.data(), wt.data(), b.data(), y.data(), r);
}

void linear_backward_input(LinearDims d, std::span<const double> dy, std::span<const double> w,
                           std::span<double> dx) {
    std::vector<double> scratch(d.in);
    for (std::size_t r = 0; r < d.batch; ++r)
        input_grad_row(d, dy.data(), w.data(), dx.data(), scratch.data(), r);
}

void linear_backward_params(LinearDims d, std::span<const double> dy, std::span<const double> x,
                            std::span<double> dw, std::span<double> db) {
    std::vector<double> scratch(d.in);
    for (std::size_t o = 0; o < d.out; ++o)
        param_grad_row(d, dy.data(), x.data(), dw.data(), db.data(), scratch.data(), o);
}

}  // namespace serial

namespace omp {

void linear_forward(LinearDims d, std::span<const double> x, std::span<const double> w,
                    std::span<const double> b, std::span<double> y) {
    const auto wt = transpose(d, w);
    const auto rows = static_cast<std::int64_t>(d.batch);
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < rows; ++r)
        forward_row(d, x.data(), wt.data(), b.data(), y.data(), static_cast<std::size_t>(r));
}

void linear_backward_input(LinearDims d, std::span<const double> dy, std::span<const double> w,
                           std::span<double> dx) {
    const auto rows = static_cast<std::int64_t>(d.batch);
#pragma omp parallel
    {
        std::vector<double> scratch(d.in);
#pragma omp for schedule(static)
        for (std::int64_t r = 0; r < rows; ++r)
            input_grad_row(d, dy.data(), w.data(), dx.data(), scratch.data(),
                           static_cast<std::size_t>(r));
    }
}

void linear_backward_params(LinearDims d, std::span<const double> dy, std::span<const double> x,
                            std::span<double> dw, std::span<double> db) {
    const auto outs = static_cast<std::int64_t>(d.out);
#pragma omp parallel
    {
        std::vector<double> scratch(d.in);
#pragma omp for schedule(static)
        for (std::int64_t o = 0; o < outs; ++o)
            param_grad_row(d, dy.data(), x.data(), dw.data(), db.data(), scratch.data(),
                           static_cast<std::size_t>(o));
    }
}

}  // namespace omp

namespace {

bool use_parallel(const LinearDims& d) {
#if defined(_OPENMP)
    // Nested regions (e.g. inside parallel pair training) stay serial.
    if (omp_in_parallel()) return false;
#endif
    return g_backend.load(std::memory_order_relaxed) == Backend::openmp &&
           d.batch * d.in * d.out >= kParallelThreshold;
}

}  // namespace

void linear_forward(LinearDims d, std::span<const double> x, std::span<const double> w,
                    std::span<const double> b, std::span<double> y) {
    if (use_parallel(d)) {
        omp::linear_forward(d, x, w, b, y);
    } else {
        serial::linear_forward(d, x, w, b, y);
    }
}

void linear_backward_input(LinearDims d, std::span<const double> dy, std::span<const double> w,
                           std::span<double> dx) {
    if (use_parallel(d)) {
        omp::linear_backward_input(d, dy, w, dx);
    } else {
        serial::linear_backward_input(d, dy, w, dx);
    }
}

void linear_backward_params(LinearDims d, std::span<const double> dy, std::span<const double> x,
                            std::span<double> dw, std::span<double> db) {
    if (use_parallel(d)) {
        omp::linear_backward_params(d, dy, x, dw, db);
    } else {
        serial::linear_backward_params(d, dy, x, dw, db);
    }
}

}  // namespace cotrain::kernels
