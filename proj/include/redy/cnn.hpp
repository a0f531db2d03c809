#pragma once

#include "redy/tensor.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace redy {

enum class LayerKind { conv, fc, pool_max, pool_avg, activation };
enum class Activation { none, relu, sigmoid };
enum class Mapping { conventional, channelwise };

struct LayerSpec {
    std::string name;
    LayerKind kind = LayerKind::conv;
    // Kernel (R, S, C, K). Pooling uses R x S as its window; fc uses 1 x 1 x C x K.
    std::size_t R = 1;
    std::size_t S = 1;
    std::size_t C = 0;
    std::size_t K = 0;
    std::size_t stride = 1;
    std::size_t padding = 0;
    Activation activation = Activation::none;
    // Output of an earlier layer added to this layer's pre-activation result.
    std::optional<std::size_t> add_from;

    bool has_weights() const { return kind == LayerKind::conv || kind == LayerKind::fc; }
};

struct Layer {
    LayerSpec spec;
    Tensor weights;             // (R, S, C, K)
    std::vector<double> bias;   // K entries or empty
};

using Shape3 = std::array<std::size_t, 3>;

struct Network {
    Shape3 input{0, 0, 0};
    std::vector<Layer> layers;

    /// Output shape of every layer. Throws ModelError on any inconsistency.
    std::vector<Shape3> shapes() const;

    /// Input shape of layer i.
    Shape3 input_shape(std::size_t i) const;
};

/// Output (X, Y, K) for a conv/pool layer; throws ModelError if the window does not tile.
Shape3 output_shape(const LayerSpec& spec, const Shape3& in);

double apply_activation(double v, Activation act);

/// Direct convolution with zero padding and stride; fc is the 1x1xC special case.
Tensor conv_forward_float(const Tensor& ifmap, const Tensor& weights, const LayerSpec& spec,
                          std::span<const double> bias = {});

Tensor fc_forward_float(const Tensor& input, const Tensor& weights, const LayerSpec& spec,
                        std::span<const double> bias = {});

Tensor pool_forward(const Tensor& ifmap, const LayerSpec& spec);

/// Float reference inference. Returns the output of every layer, in order.
std::vector<Tensor> forward_float(const Network& net, const Tensor& input);

/// Input tensor seen by every layer during a float run (what calibration observes).
std::vector<Tensor> layer_inputs_float(const Network& net, const Tensor& input);

/// One activation group together with the coordinates it was gathered from.
struct ActivationGroup {
    std::size_t x = 0;
    std::size_t y = 0;
    std::size_t r = 0;
    std::size_t s = 0;
    std::vector<double> values;
};

/// Channelwise: one group of depth C per window and (r,s). Conventional: one R*S*C
/// vector per window. Order is window-major (x outer), then (r,s) row-major.
/// Padded positions contribute zeros.
std::vector<ActivationGroup> extract_groups(const Tensor& ifmap, const LayerSpec& spec, Mapping mapping);

/// Gathers the channel vector of window (x,y) at kernel offset (r,s) into out.
void gather_group(const Tensor& ifmap, const LayerSpec& spec, std::size_t x, std::size_t y, std::size_t r,
                  std::size_t s, std::span<double> out);

/// Rank-3 view for a layer input: fc layers see their input flattened to 1x1xC.
Tensor as_layer_input(const Tensor& t, const LayerSpec& spec);

const char* to_string(LayerKind k);
const char* to_string(Activation a);
LayerKind parse_layer_kind(const std::string& s);
Activation parse_activation(const std::string& s);

} // namespace redy
