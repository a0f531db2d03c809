#include "redy/tensor.hpp"

#include "redy/error.hpp"

#include <functional>
#include <numeric>
#include <string>

namespace redy {

std::size_t element_count(std::span<const std::size_t> dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(std::vector<std::size_t> dims, double fill)
    : dims_(std::move(dims)), data_(element_count(dims_), fill) {}

Tensor::Tensor(std::vector<std::size_t> dims, std::vector<double> data) : dims_(std::move(dims)), data_(std::move(data)) {
    if (element_count(dims_) != data_.size())
        throw ModelError("tensor invariant violated: product of dims (" + std::to_string(element_count(dims_)) +
                         ") != data length (" + std::to_string(data_.size()) + ")");
}

Tensor Tensor::reshaped(std::vector<std::size_t> dims) const {
    return Tensor(std::move(dims), data_);
}

} // namespace redy
