#include "redy/cnn.hpp"

#include "redy/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace redy {

namespace {

std::string shape_str(const Shape3& s) {
    return std::to_string(s[0]) + "x" + std::to_string(s[1]) + "x" + std::to_string(s[2]);
}

std::size_t tiled_extent(std::size_t in, std::size_t kernel, std::size_t pad, std::size_t stride,
                         const std::string& layer) {
    if (stride == 0) throw ModelError("layer " + layer + ": stride must be positive");
    const std::size_t padded = in + 2 * pad;
    if (padded < kernel) throw ModelError("layer " + layer + ": kernel larger than padded input");
    if ((padded - kernel) % stride != 0)
        throw ModelError("layer " + layer + ": output dims must be integral ((W - R + 2*pad) % stride == 0)");
    return (padded - kernel) / stride + 1;
}

void add_in_place(Tensor& dst, const Tensor& src, const std::string& layer) {
    if (dst.size() != src.size()) throw ModelError("layer " + layer + ": skip connection shape mismatch");
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

Tensor apply_layer(const Layer& layer, const Tensor& in, const std::vector<Tensor>& outputs) {
    const LayerSpec& spec = layer.spec;
    LayerSpec core = spec;
    core.activation = Activation::none;
    Tensor out;
    switch (spec.kind) {
    case LayerKind::conv: out = conv_forward_float(in, layer.weights, core, layer.bias); break;
    case LayerKind::fc: out = fc_forward_float(in, layer.weights, core, layer.bias); break;
    case LayerKind::pool_max:
    case LayerKind::pool_avg: out = pool_forward(in, spec); break;
    case LayerKind::activation: out = in; break;
    }
    if (spec.add_from) add_in_place(out, outputs.at(*spec.add_from), spec.name);
    for (double& v : out.data()) v = apply_activation(v, spec.activation);
    return out;
}

} // namespace

Shape3 output_shape(const LayerSpec& spec, const Shape3& in) {
    switch (spec.kind) {
    case LayerKind::conv:
        return {tiled_extent(in[0], spec.R, spec.padding, spec.stride, spec.name),
                tiled_extent(in[1], spec.S, spec.padding, spec.stride, spec.name), spec.K};
    case LayerKind::fc: return {1, 1, spec.K};
    case LayerKind::pool_max:
    case LayerKind::pool_avg:
        return {tiled_extent(in[0], spec.R, spec.padding, spec.stride, spec.name),
                tiled_extent(in[1], spec.S, spec.padding, spec.stride, spec.name), in[2]};
    case LayerKind::activation: return in;
    }
    return in;
}

Shape3 Network::input_shape(std::size_t i) const {
    if (i == 0) return input;
    return shapes().at(i - 1);
}

std::vector<Shape3> Network::shapes() const {
    std::vector<Shape3> out;
    out.reserve(layers.size());
    Shape3 cur = input;
    if (cur[0] == 0 || cur[1] == 0 || cur[2] == 0) throw ModelError("network input shape must be non-empty");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const Layer& l = layers[i];
        const LayerSpec& spec = l.spec;
        if (spec.kind == LayerKind::conv) {
            if (spec.C != cur[2])
                throw ModelError("layer " + spec.name + ": kernel depth " + std::to_string(spec.C) +
                                 " does not match input " + shape_str(cur));
        }
        if (spec.kind == LayerKind::fc) {
            if (spec.R != 1 || spec.S != 1 || spec.C != cur[0] * cur[1] * cur[2])
                throw ModelError("layer " + spec.name + ": fc kernel must be 1x1xC with C = flattened input size");
        }
        if (spec.has_weights()) {
            const std::vector<std::size_t> want{spec.R, spec.S, spec.C, spec.K};
            if (l.weights.dims() != want) throw ModelError("layer " + spec.name + ": weight dims do not match RxSxCxK");
            if (!l.bias.empty() && l.bias.size() != spec.K)
                throw ModelError("layer " + spec.name + ": bias length must equal K");
        }
        const Shape3 next = output_shape(spec, cur);
        if (spec.add_from) {
            if (*spec.add_from >= i) throw ModelError("layer " + spec.name + ": skip source must precede the layer");
            if (out[*spec.add_from] != next) throw ModelError("layer " + spec.name + ": skip connection shape mismatch");
        }
        out.push_back(next);
        cur = next;
    }
    return out;
}

double apply_activation(double v, Activation act) {
    switch (act) {
    case Activation::none: return v;
    case Activation::relu: return v > 0.0 ? v : 0.0;
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-v));
    }
    return v;
}

Tensor conv_forward_float(const Tensor& ifmap, const Tensor& weights, const LayerSpec& spec,
                          std::span<const double> bias) {
    if (ifmap.rank() != 3) throw ModelError("conv: ifmap must be rank 3");
    const std::vector<std::size_t> wdims{spec.R, spec.S, spec.C, spec.K};
    if (weights.dims() != wdims) throw ModelError("conv: weight dims do not match RxSxCxK");
    if (ifmap.dim(2) != spec.C) throw ModelError("conv: ifmap depth does not match kernel depth");
    if (!bias.empty() && bias.size() != spec.K) throw ModelError("conv: bias length must equal K");

    const Shape3 in{ifmap.dim(0), ifmap.dim(1), ifmap.dim(2)};
    const Shape3 os = output_shape(spec, in);
    Tensor out({os[0], os[1], os[2]});
    std::vector<double> acc(spec.K);
    for (std::size_t x = 0; x < os[0]; ++x) {
        for (std::size_t y = 0; y < os[1]; ++y) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (std::size_t r = 0; r < spec.R; ++r) {
                const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x * spec.stride + r) -
                                          static_cast<std::ptrdiff_t>(spec.padding);
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(in[0])) continue;
                for (std::size_t s = 0; s < spec.S; ++s) {
                    const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y * spec.stride + s) -
                                              static_cast<std::ptrdiff_t>(spec.padding);
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in[1])) continue;
                    for (std::size_t c = 0; c < spec.C; ++c) {
                        const double a = ifmap.at(ix, iy, c);
                        if (a == 0.0) continue;
                        const double* w = &weights.data()[((r * spec.S + s) * spec.C + c) * spec.K];
                        for (std::size_t k = 0; k < spec.K; ++k) acc[k] += a * w[k];
                    }
                }
            }
            for (std::size_t k = 0; k < spec.K; ++k) {
                const double b = bias.empty() ? 0.0 : bias[k];
                out.at(x, y, k) = apply_activation(acc[k] + b, spec.activation);
            }
        }
    }
    return out;
}

Tensor as_layer_input(const Tensor& t, const LayerSpec& spec) {
    if (spec.kind == LayerKind::fc) return t.reshaped({1, 1, t.size()});
    if (t.rank() != 3) throw ModelError("layer " + spec.name + ": expected a rank-3 feature map");
    return t;
}

Tensor fc_forward_float(const Tensor& input, const Tensor& weights, const LayerSpec& spec,
                        std::span<const double> bias) {
    return conv_forward_float(input.reshaped({1, 1, input.size()}), weights, spec, bias);
}

Tensor pool_forward(const Tensor& ifmap, const LayerSpec& spec) {
    if (ifmap.rank() != 3) throw ModelError("pool: ifmap must be rank 3");
    const Shape3 in{ifmap.dim(0), ifmap.dim(1), ifmap.dim(2)};
    const Shape3 os = output_shape(spec, in);
    Tensor out({os[0], os[1], os[2]});
    const bool is_max = spec.kind == LayerKind::pool_max;
    for (std::size_t x = 0; x < os[0]; ++x) {
        for (std::size_t y = 0; y < os[1]; ++y) {
            for (std::size_t c = 0; c < in[2]; ++c) {
                double acc = is_max ? -std::numeric_limits<double>::infinity() : 0.0;
                for (std::size_t r = 0; r < spec.R; ++r) {
                    for (std::size_t s = 0; s < spec.S; ++s) {
                        const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x * spec.stride + r) -
                                                  static_cast<std::ptrdiff_t>(spec.padding);
                        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y * spec.stride + s) -
                                                  static_cast<std::ptrdiff_t>(spec.padding);
                        const bool inside = ix >= 0 && iy >= 0 && ix < static_cast<std::ptrdiff_t>(in[0]) &&
                                            iy < static_cast<std::ptrdiff_t>(in[1]);
                        const double v = inside ? ifmap.at(ix, iy, c) : 0.0;
                        acc = is_max ? std::max(acc, v) : acc + v;
                    }
                }
                out.at(x, y, c) = is_max ? acc : acc / static_cast<double>(spec.R * spec.S);
            }
        }
    }
    return out;
}

std::vector<Tensor> forward_float(const Network& net, const Tensor& input) {
    const auto shapes = net.shapes();
    if (input.size() != net.input[0] * net.input[1] * net.input[2])
        throw ModelError("input tensor size does not match the network input shape");
    std::vector<Tensor> outputs;
    outputs.reserve(net.layers.size());
    Tensor cur = input.reshaped({net.input[0], net.input[1], net.input[2]});
    for (const Layer& layer : net.layers) {
        Tensor out = apply_layer(layer, as_layer_input(cur, layer.spec), outputs);
        outputs.push_back(out);
        cur = std::move(out);
    }
    return outputs;
}

std::vector<Tensor> layer_inputs_float(const Network& net, const Tensor& input) {
    const auto outputs = forward_float(net, input);
    std::vector<Tensor> inputs;
    inputs.reserve(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const Tensor& src = i == 0 ? input : outputs[i - 1];
        inputs.push_back(i == 0 ? src.reshaped({net.input[0], net.input[1], net.input[2]}) : src);
    }
    return inputs;
}

void gather_group(const Tensor& ifmap, const LayerSpec& spec, std::size_t x, std::size_t y, std::size_t r,
                  std::size_t s, std::span<double> out) {
    const std::size_t C = ifmap.dim(2);
    const std::ptrdiff_t ix =
        static_cast<std::ptrdiff_t>(x * spec.stride + r) - static_cast<std::ptrdiff_t>(spec.padding);
    const std::ptrdiff_t iy =
        static_cast<std::ptrdiff_t>(y * spec.stride + s) - static_cast<std::ptrdiff_t>(spec.padding);
    if (ix < 0 || iy < 0 || ix >= static_cast<std::ptrdiff_t>(ifmap.dim(0)) ||
        iy >= static_cast<std::ptrdiff_t>(ifmap.dim(1))) {
        std::fill(out.begin(), out.begin() + C, 0.0);
        return;
    }
    const double* src = &ifmap.data()[(static_cast<std::size_t>(ix) * ifmap.dim(1) + iy) * C];
    std::copy(src, src + C, out.begin());
}

std::vector<ActivationGroup> extract_groups(const Tensor& ifmap_in, const LayerSpec& spec, Mapping mapping) {
    const Tensor ifmap = as_layer_input(ifmap_in, spec);
    const Shape3 in{ifmap.dim(0), ifmap.dim(1), ifmap.dim(2)};
    const Shape3 os = output_shape(spec, in);
    const std::size_t C = in[2];
    std::vector<ActivationGroup> groups;
    const std::size_t per_window = mapping == Mapping::channelwise ? spec.R * spec.S : 1;
    groups.reserve(os[0] * os[1] * per_window);
    for (std::size_t x = 0; x < os[0]; ++x) {
        for (std::size_t y = 0; y < os[1]; ++y) {
            if (mapping == Mapping::channelwise) {
                for (std::size_t r = 0; r < spec.R; ++r) {
                    for (std::size_t s = 0; s < spec.S; ++s) {
                        ActivationGroup g{x, y, r, s, std::vector<double>(C)};
                        gather_group(ifmap, spec, x, y, r, s, g.values);
                        groups.push_back(std::move(g));
                    }
                }
            } else {
                ActivationGroup g{x, y, 0, 0, std::vector<double>(spec.R * spec.S * C)};
                for (std::size_t r = 0; r < spec.R; ++r)
                    for (std::size_t s = 0; s < spec.S; ++s)
                        gather_group(ifmap, spec, x, y, r, s,
                                     std::span<double>(g.values).subspan((r * spec.S + s) * C, C));
                groups.push_back(std::move(g));
            }
        }
    }
    return groups;
}

const char* to_string(LayerKind k) {
    switch (k) {
    case LayerKind::conv: return "conv";
    case LayerKind::fc: return "fc";
    case LayerKind::pool_max: return "pool_max";
    case LayerKind::pool_avg: return "pool_avg";
    case LayerKind::activation: return "activation";
    }
    return "?";
}

const char* to_string(Activation a) {
    switch (a) {
    case Activation::none: return "none";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    }
    return "?";
}

LayerKind parse_layer_kind(const std::string& s) {
    if (s == "conv") return LayerKind::conv;
    if (s == "fc") return LayerKind::fc;
    if (s == "pool_max") return LayerKind::pool_max;
    if (s == "pool_avg") return LayerKind::pool_avg;
    if (s == "activation") return LayerKind::activation;
    throw ModelError("unknown layer kind '" + s + "'");
}

Activation parse_activation(const std::string& s) {
    if (s == "none") return Activation::none;
    if (s == "relu") return Activation::relu;
    if (s == "sigmoid") return Activation::sigmoid;
    throw ModelError("unknown activation '" + s + "'");
}

} // namespace redy
