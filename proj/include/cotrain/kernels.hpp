#pragma once

// Dense kernels behind the linear layer. Every kernel exists twice: a serial
// reference and an OpenMP version. Both reduce in the same order per output
// element, so their results are bit-identical and the backend choice never
// changes a training run.

#include <cstddef>
#include <span>

namespace cotrain::kernels {

struct LinearDims {
    std::size_t batch;
    std::size_t in;
    std::size_t out;
};

enum class Backend { serial, openmp };

/// Process-wide backend used by the dispatching entry points below.
void set_backend(Backend backend) noexcept;
Backend backend() noexcept;

namespace serial {
// y[r,o] = b[o] + sum_i x[r,i] * w[o,i]
void linear_forward(LinearDims d, std::span<const double> x, std::span<const double> w,
                    std::span<const double> b, std::span<double> y);
// dx[r,i] += sum_o dy[r,o] * w[o,i]
void linear_backward_input(LinearDims d, std::span<const double> dy, std::span<const double> w,
                           std::span<double> dx);
// dw[o,i] += sum_r dy[r,o] * x[r,i];  db[o] += sum_r dy[r,o]
void linear_backward_params(LinearDims d, std::span<const double> dy, std::span<const double> x,
                            std::span<double> dw, std::span<double> db);
}  // namespace serial

namespace omp {
void linear_forward(LinearDims d, std::span<const double> x, std::span<const double> w,
                    std::span<const double> b, std::span<double> y);
void linear_backward_input(LinearDims d, std::span<const double> dy, std::span<const double> w,
                           std::span<double> dx);
void linear_backward_params(LinearDims d, std::span<const double> dy, std::span<const double> x,
                            std::span<double> dw, std::span<double> db);
}  // namespace omp

void linear_forward(LinearDims d, std::span<const double> x, std::span<const double> w,
                    std::span<const double> b, std::span<double> y);
void linear_backward_input(LinearDims d, std::span<const double> dy, std::span<const double> w,
                           std::span<double> dx);
void linear_backward_params(LinearDims d, std::span<const double> dy, std::span<const double> x,
                            std::span<double> dw, std::span<double> db);

}  // namespace cotrain::kernels
