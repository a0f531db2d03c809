#pragma once

#include "redy/cnn.hpp"

#include <cstdint>
#include <vector>

namespace redy {

inline constexpr std::size_t kSyntheticClasses = 10;

/// Small three-MAC-layer CNN used by the fixture tool and the test suites:
///   16x16x3 -> conv 3x3x3x32 pad 1 -> maxpool 4 -> conv 3x3x32x32 pad 1 -> avgpool 2 -> fc 128x10
/// The first layer, which keeps 8 bits, is the pipeline bottleneck.
/// With flat = false the convolutions use ReLU. With flat = true they are linear,
/// so intermediate activations are spread over their range. Convolution weights
/// are random; the fc layer is a ridge-regression readout fitted to labelled
/// samples from make_synthetic_dataset.
Network make_synthetic_network(std::uint64_t seed, bool flat = false);

struct SyntheticDataset {
    std::vector<Tensor> inputs;
    std::vector<int> labels;
};

/// count images of the network's input shape with values in [0, 1). Each is one of
/// kSyntheticClasses fixed random prototypes blended with uniform noise (3:1);
/// the label is the prototype index.
SyntheticDataset make_synthetic_dataset(const Network& net, std::size_t count, std::uint64_t seed);

std::vector<Tensor> make_synthetic_inputs(const Network& net, std::size_t count, std::uint64_t seed);

} // namespace redy
