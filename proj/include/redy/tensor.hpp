#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace redy {

/// Dense row-major tensor, last dimension innermost.
///
/// Feature maps are (W, H, C) and kernels are (R, S, C, K), so the C values
/// sharing one spatial coordinate are contiguous.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> dims, double fill = 0.0);
    Tensor(std::vector<std::size_t> dims, std::vector<double> data);

    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t rank() const { return dims_.size(); }
    std::size_t dim(std::size_t i) const { return dims_.at(i); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // (x, y, c) access for rank-3 feature maps.
    double& at(std::size_t x, std::size_t y, std::size_t c) { return data_[(x * dims_[1] + y) * dims_[2] + c]; }
    double at(std::size_t x, std::size_t y, std::size_t c) const { return data_[(x * dims_[1] + y) * dims_[2] + c]; }

    // (r, s, c, k) access for rank-4 kernels.
    double at(std::size_t r, std::size_t s, std::size_t c, std::size_t k) const {
        return data_[((r * dims_[1] + s) * dims_[2] + c) * dims_[3] + k];
    }

    /// Same data viewed under new dims; element counts must agree.
    Tensor reshaped(std::vector<std::size_t> dims) const;

    bool operator==(const Tensor&) const = default;

private:
    std::vector<std::size_t> dims_;
    std::vector<double> data_;
};

std::size_t element_count(std::span<const std::size_t> dims);

} // namespace redy
