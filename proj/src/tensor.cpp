#include "cotrain/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "cotrain/error.hpp"

namespace cotrain {

namespace {

std::size_t extent_product(const std::vector<std::size_t>& shape) {
    if (shape.empty()) {
        throw ShapeError("tensor shape must have at least one extent");
    }
    for (auto e : shape) {
        if (e == 0) {
            throw ShapeError("tensor extents must be positive");
        }
    }
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(extent_product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (extent_product(shape_) != data_.size()) {
        throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string());
    }
}

std::size_t Tensor::rows() const {
    if (shape_.empty()) return 0;
    if (shape_.size() == 1) return 1;
    if (shape_.size() != 2) throw ShapeError("expected a matrix, got " + shape_string());
    return shape_[0];
}

std::size_t Tensor::cols() const {
    if (shape_.empty()) return 0;
    if (shape_.size() == 1) return shape_[0];
    if (shape_.size() != 2) throw ShapeError("expected a matrix, got " + shape_string());
    return shape_[1];
}

std::span<const double> Tensor::row(std::size_t r) const {
    const auto c = cols();
    return std::span<const double>(data_).subspan(r * c, c);
}

std::span<double> Tensor::row(std::size_t r) {
    const auto c = cols();
    return std::span<double>(data_).subspan(r * c, c);
}

std::span<double> Tensor::grad() {
    if (!grad_) throw StateError("tensor has no gradient");
    return *grad_;
}

std::span<const double> Tensor::grad() const {
    if (!grad_) throw StateError("tensor has no gradient");
    return *grad_;
}

void Tensor::zero_grad() {
    if (grad_) {
        std::fill(grad_->begin(), grad_->end(), 0.0);
    } else {
        grad_.emplace(data_.size(), 0.0);
    }
}

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Tensor::shape_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape_[i]);
    }
    return s + "]";
}

Tensor Tensor::concat_rows(const Tensor& top, const Tensor& bottom) {
    if (top.empty()) return bottom;
    if (bottom.empty()) return top;
    if (top.cols() != bottom.cols()) {
        throw ShapeError("concat_rows: column mismatch " + top.shape_string() + " vs " +
                         bottom.shape_string());
    }
    std::vector<double> data;
    data.reserve(top.size() + bottom.size());
    data.insert(data.end(), top.data_.begin(), top.data_.end());
    data.insert(data.end(), bottom.data_.begin(), bottom.data_.end());
    return Tensor({top.rows() + bottom.rows(), top.cols()}, std::move(data));
}

Tensor Tensor::gather_rows(std::span<const std::size_t> indices) const {
    if (indices.empty()) return {};
    const auto c = cols();
    std::vector<double> data;
    data.reserve(indices.size() * c);
    for (auto idx : indices) {
        if (idx >= rows()) throw ShapeError("gather_rows: row index out of range");
        auto r = row(idx);
        data.insert(data.end(), r.begin(), r.end());
    }
    return Tensor({indices.size(), c}, std::move(data));
}

}  // namespace cotrain
