#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cotrain {

/// Dense row-major array of doubles with an optional gradient buffer.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
        return Tensor({rows, cols}, fill);
    }

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    /// Rows/cols of a rank-2 tensor; a rank-1 tensor is treated as a single row
    /// and a default-constructed tensor as 0x0 (an empty batch).
    std::size_t rows() const;
    std::size_t cols() const;

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    std::vector<double>& values() noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

    std::span<const double> row(std::size_t r) const;
    std::span<double> row(std::size_t r);

    bool has_grad() const noexcept { return grad_.has_value(); }
    /// Gradient buffer; throws StateError when absent.
    std::span<double> grad();
    std::span<const double> grad() const;
    /// Allocates (or resets) the gradient buffer to zeros.
    void zero_grad();
    void clear_grad() noexcept { grad_.reset(); }

    bool all_finite() const noexcept;
    std::string shape_string() const;

    /// Stacks the rows of `top` above the rows of `bottom` (either may be empty).
    static Tensor concat_rows(const Tensor& top, const Tensor& bottom);
    Tensor gather_rows(std::span<const std::size_t> indices) const;

    friend bool operator==(const Tensor& a, const Tensor& b) {
        return a.shape_ == b.shape_ && a.data_ == b.data_;
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
    std::optional<std::vector<double>> grad_;
};

}  // namespace cotrain
