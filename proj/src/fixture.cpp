#include "redy/fixture.hpp"

#include <cmath>
#include <random>

#include <Eigen/Dense>

namespace redy {

namespace {

constexpr std::size_t kReadoutSamples = 400;
constexpr double kRidge = 1e-3;

Layer mac_layer(const char* name, LayerKind kind, std::size_t r, std::size_t c, std::size_t k, std::size_t pad,
                Activation act, std::mt19937_64& rng) {
    Layer l;
    l.spec.name = name;
    l.spec.kind = kind;
    l.spec.R = r;
    l.spec.S = r;
    l.spec.C = c;
    l.spec.K = k;
    l.spec.padding = pad;
    l.spec.activation = act;
    const double stddev = std::sqrt(2.0 / static_cast<double>(r * r * c));
    std::normal_distribution<double> w(0.0, stddev);
    std::vector<double> data(r * r * c * k);
    for (auto& v : data) v = static_cast<float>(w(rng));
    l.weights = Tensor({r, r, c, k}, std::move(data));
    std::uniform_real_distribution<double> b(-0.05, 0.05);
    l.bias.resize(k);
    for (auto& v : l.bias) v = static_cast<float>(b(rng));
    return l;
}

Layer pool_layer(const char* name, LayerKind kind, std::size_t window) {
    Layer l;
    l.spec.name = name;
    l.spec.kind = kind;
    l.spec.R = window;
    l.spec.S = window;
    l.spec.stride = window;
    return l;
}

} // namespace

Network make_synthetic_network(std::uint64_t seed, bool flat) {
    std::mt19937_64 rng(seed);
    const Activation act = flat ? Activation::none : Activation::relu;
    Network net;
    net.input = {16, 16, 3};
    net.layers.push_back(mac_layer("conv1", LayerKind::conv, 3, 3, 32, 1, act, rng));
    net.layers.push_back(pool_layer("pool1", LayerKind::pool_max, 4));
    net.layers.push_back(mac_layer("conv2", LayerKind::conv, 3, 32, 32, 1, act, rng));
    net.layers.push_back(pool_layer("pool2", LayerKind::pool_avg, 2));
    net.layers.push_back(mac_layer("fc", LayerKind::fc, 1, 128, kSyntheticClasses, 0, Activation::none, rng));
    net.shapes();

    // Ridge-regression readout: fc maps the features of labelled samples to one-hot targets.
    const std::size_t fc = net.layers.size() - 1;
    Layer& head = net.layers[fc];
    const std::size_t c = head.spec.C;
    const std::size_t k = head.spec.K;
    const SyntheticDataset train = make_synthetic_dataset(net, kReadoutSamples, seed ^ 0x5bd1e995u);
    Eigen::MatrixXd x(train.inputs.size(), c + 1);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(train.inputs.size(), k);
    for (std::size_t i = 0; i < train.inputs.size(); ++i) {
        const Tensor f = layer_inputs_float(net, train.inputs[i])[fc];
        for (std::size_t j = 0; j < c; ++j) x(i, j) = f[j];
        x(i, c) = 1.0;
        y(i, train.labels[i]) = 1.0;
    }
    Eigen::MatrixXd gram = x.transpose() * x;
    gram.diagonal().array() += kRidge * gram.diagonal().mean();
    const Eigen::MatrixXd w = gram.ldlt().solve(x.transpose() * y);
    for (std::size_t j = 0; j < c; ++j)
        for (std::size_t col = 0; col < k; ++col) head.weights[j * k + col] = static_cast<float>(w(j, col));
    for (std::size_t col = 0; col < k; ++col) head.bias[col] = static_cast<float>(w(c, col));
    return net;
}

SyntheticDataset make_synthetic_dataset(const Network& net, std::size_t count, std::uint64_t seed) {
    const std::size_t n = net.input[0] * net.input[1] * net.input[2];
    std::uniform_real_distribution<double> u(0.0, 1.0);
    // Fixed class prototypes, shared by every call for this input shape.
    std::mt19937_64 proto_rng(0x9e3779b97f4a7c15ull ^ n);
    std::vector<std::vector<double>> prototypes(kSyntheticClasses, std::vector<double>(n));
    for (auto& p : prototypes)
        for (auto& v : p) v = u(proto_rng);

    std::mt19937_64 rng(seed);
    SyntheticDataset out;
    for (std::size_t i = 0; i < count; ++i) {
        const int label = static_cast<int>(rng() % kSyntheticClasses);
        const auto& p = prototypes[label];
        Tensor t({net.input[0], net.input[1], net.input[2]});
        for (std::size_t j = 0; j < n; ++j) t[j] = static_cast<float>(0.75 * p[j] + 0.25 * u(rng));
        out.inputs.push_back(std::move(t));
        out.labels.push_back(label);
    }
    return out;
}

std::vector<Tensor> make_synthetic_inputs(const Network& net, std::size_t count, std::uint64_t seed) {
    return make_synthetic_dataset(net, count, seed).inputs;
}

} // namespace redy
