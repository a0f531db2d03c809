#pragma once

#include "redy/cnn.hpp"
#include "redy/tensor.hpp"

#include <random>
#include <vector>

namespace testutil {

inline redy::Tensor random_tensor(std::vector<std::size_t> dims, std::mt19937_64& rng, double lo = -1.0,
                                  double hi = 1.0) {
    redy::Tensor t(std::move(dims));
    std::uniform_real_distribution<double> u(lo, hi);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = u(rng);
    return t;
}

inline redy::LayerSpec conv(const char* name, std::size_t r, std::size_t c, std::size_t k, std::size_t stride = 1,
                            std::size_t pad = 0, redy::Activation act = redy::Activation::none) {
    redy::LayerSpec s;
    s.name = name;
    s.kind = redy::LayerKind::conv;
    s.R = r;
    s.S = r;
    s.C = c;
    s.K = k;
    s.stride = stride;
    s.padding = pad;
    s.activation = act;
    return s;
}

inline redy::Layer layer_with_random_weights(const redy::LayerSpec& s, std::mt19937_64& rng) {
    redy::Layer l;
    l.spec = s;
    l.weights = random_tensor({s.R, s.S, s.C, s.K}, rng, -0.5, 0.5);
    return l;
}

// Naive oracle: six nested loops straight from the convolution definition.
inline double conv_oracle(const redy::Tensor& in, const redy::Tensor& w, const redy::LayerSpec& s, std::size_t x,
                          std::size_t y, std::size_t k) {
    double acc = 0.0;
    for (std::size_t r = 0; r < s.R; ++r)
        for (std::size_t q = 0; q < s.S; ++q)
            for (std::size_t c = 0; c < s.C; ++c) {
                const long ix = static_cast<long>(x * s.stride + r) - static_cast<long>(s.padding);
                const long iy = static_cast<long>(y * s.stride + q) - static_cast<long>(s.padding);
                if (ix < 0 || iy < 0 || ix >= static_cast<long>(in.dim(0)) || iy >= static_cast<long>(in.dim(1)))
                    continue;
                acc += in.at(ix, iy, c) * w.at(r, q, c, k);
            }
    return acc;
}

} // namespace testutil
