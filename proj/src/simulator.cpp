#include "redy/simulator.hpp"

#include "redy/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace redy {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

bool all_zero(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

} // namespace

const char* to_string(QuantPolicy p) {
    switch (p) {
    case QuantPolicy::static8: return "static8";
    case QuantPolicy::redy: return "redy";
    case QuantPolicy::random_baseline: return "random";
    }
    return "?";
}

QuantPolicy parse_policy(const std::string& s) {
    if (s == "static8") return QuantPolicy::static8;
    if (s == "redy") return QuantPolicy::redy;
    if (s == "random") return QuantPolicy::random_baseline;
    throw ConfigError("unknown policy '" + s + "' (expected static8|redy|random)");
}

const char* to_string(HistogramMode m) {
    return m == HistogramMode::exact ? "exact" : "exponent";
}

HistogramMode parse_histogram_mode(const std::string& s) {
    if (s == "exact") return HistogramMode::exact;
    if (s == "exponent") return HistogramMode::exponent;
    throw ConfigError("unknown histogram mode '" + s + "' (expected exact|exponent)");
}

void RedyConfig::validate() const {
    if (bins < 2) throw ConfigError("redy invariant violated: bins >= 2");
    if (!(subsample_ratio > 0.0 && subsample_ratio <= 1.0))
        throw ConfigError("redy invariant violated: subsample_ratio in (0,1]");
    thresholds.validate(bins);
}

QuantizedWeights quantize_weights(const Tensor& weights, int weight_bits) {
    QuantizedWeights q;
    double max_abs = 0.0;
    for (double w : weights.data()) max_abs = std::max(max_abs, std::abs(w));
    const std::int32_t qmax = (1 << (weight_bits - 1)) - 1;
    q.scale = max_abs > 0.0 ? qmax / max_abs : 1.0;
    q.codes.resize(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const auto c = round_half_away(weights[i] * q.scale);
        q.codes[i] = static_cast<std::int32_t>(std::clamp<std::int64_t>(c, -qmax, qmax));
    }
    return q;
}

Mapping layer_mapping(const LayerSpec& spec, int bins) {
    return static_cast<int>(spec.C) < bins && spec.kind == LayerKind::conv ? Mapping::conventional
                                                                           : Mapping::channelwise;
}

bool layer_uses_redy(const LayerSpec& spec, int bins) {
    return spec.has_weights() && static_cast<int>(spec.C) >= bins;
}

CompiledNetwork::CompiledNetwork(const Network& net, const CrossbarConfig& cfg, int bins)
    : net_(&net), cfg_(cfg), bins_(bins) {
    cfg.validate();
    net.shapes();
    layers_.resize(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const Layer& layer = net.layers[i];
        const LayerSpec& spec = layer.spec;
        if (!spec.has_weights()) continue;
        CompiledLayer cl;
        cl.index = i;
        cl.mapping = layer_mapping(spec, bins);
        cl.redy_applied = layer_uses_redy(spec, bins);
        cl.weights = quantize_weights(layer.weights, cfg.weight_bits);

        const std::size_t positions = cl.mapping == Mapping::channelwise ? spec.R * spec.S : 1;
        const std::size_t depth = cl.mapping == Mapping::channelwise ? spec.C : spec.R * spec.S * spec.C;
        for (std::size_t p = 0; p < positions; ++p) {
            // (r, s, c, k) layout: each (r,s) slice is a contiguous C x K block.
            const std::span<const std::int32_t> block(cl.weights.codes.data() + p * depth * spec.K, depth * spec.K);
            cl.matrices.push_back(program_weights(block, depth, spec.K, true, cfg));
            std::vector<std::int64_t> sums(spec.K, 0);
            for (std::size_t row = 0; row < depth; ++row)
                for (std::size_t k = 0; k < spec.K; ++k) sums[k] += block[row * spec.K + k];
            cl.weight_sums.push_back(std::move(sums));
        }
        layers_[i] = std::move(cl);
    }
}

ActivityCounters InferenceResult::counters() const {
    ActivityCounters c;
    for (const auto& l : layers) c += l.counters;
    return c;
}

ActivityCounters InferenceResult::baseline_counters() const {
    ActivityCounters c;
    for (const auto& l : layers) c += l.baseline_counters;
    return c;
}

std::vector<PrecisionDecision> InferenceResult::decisions() const {
    std::vector<PrecisionDecision> out;
    for (const auto& l : layers) out.insert(out.end(), l.decisions.begin(), l.decisions.end());
    return out;
}

namespace {

Tensor run_mac_layer(const CompiledNetwork& net, const CompiledLayer& cl, const ValueRange& range,
                     const Tensor& ifmap, const ForwardOptions& opts, LayerRun& run) {
    const Layer& layer = net.network().layers[cl.index];
    const LayerSpec& spec = layer.spec;
    const Shape3 in{ifmap.dim(0), ifmap.dim(1), ifmap.dim(2)};
    const Shape3 os = output_shape(spec, in);
    const std::size_t windows = os[0] * os[1];
    const std::size_t positions = cl.matrices.size();
    const std::size_t depth = cl.group_depth();
    const std::size_t C = in[2];

    std::array<QuantParams, kMaxBits + 1> params{};
    for (int n = 1; n <= kMaxBits; ++n) params[n] = make_params(range, n);
    const HistogramConfig hcfg = HistogramConfig::for_range(range, opts.redy.bins, opts.redy.subsample_ratio);

    // Pre-processing: gather every group of the layer and decide its precision.
    std::vector<double> values(windows * positions * depth);
    run.decisions.resize(windows * positions);
    for (std::size_t x = 0; x < os[0]; ++x) {
        for (std::size_t y = 0; y < os[1]; ++y) {
            const std::size_t w = x * os[1] + y;
            for (std::size_t p = 0; p < positions; ++p) {
                const std::size_t g = w * positions + p;
                const std::span<double> group(values.data() + g * depth, depth);
                PrecisionDecision& d = run.decisions[g];
                if (cl.mapping == Mapping::channelwise) {
                    const std::size_t r = p / spec.S;
                    const std::size_t s = p % spec.S;
                    gather_group(ifmap, spec, x, y, r, s, group);
                    d.id = GroupId{static_cast<int>(cl.index), static_cast<int>(x), static_cast<int>(y),
                                   static_cast<int>(r), static_cast<int>(s)};
                } else {
                    for (std::size_t r = 0; r < spec.R; ++r)
                        for (std::size_t s = 0; s < spec.S; ++s)
                            gather_group(ifmap, spec, x, y, r, s, group.subspan((r * spec.S + s) * C, C));
                    d.id = GroupId{static_cast<int>(cl.index), static_cast<int>(x), static_cast<int>(y), 0, 0};
                }
                d.bitwidth = kMaxBits;
                if (opts.policy != QuantPolicy::static8 && cl.redy_applied) {
                    const GroupStats stats = compute_histogram(group, hcfg, opts.redy.mode);
                    d.du = deviation_from_uniform(stats);
                    d.bitwidth = decide_precision(d.du, static_cast<int>(depth), opts.redy.thresholds, opts.redy.bins);
                    run.histogram_samples += stats.sampled_count;
                    run.redy_decisions += 1;
                }
            }
        }
    }
    if (opts.policy == QuantPolicy::random_baseline && opts.reference) {
        const auto& ref_layers = opts.reference->layers;
        const auto it = std::find_if(ref_layers.begin(), ref_layers.end(),
                                     [&](const LayerRun& l) { return l.layer == cl.index; });
        if (it == ref_layers.end() || it->decisions.size() != run.decisions.size())
            throw Error("random baseline: reference run does not match layer " + spec.name);
        for (std::size_t g = 0; g < run.decisions.size(); ++g) run.decisions[g].bitwidth = it->decisions[g].bitwidth;
    }
    if (opts.policy == QuantPolicy::random_baseline)
        run.decisions = random_precision_baseline(run.decisions, mix_seed(opts.seed, cl.index));

    // Execution and post-processing: bit-serial MVMs, rescale, accumulate, dequantize.
    Tensor out({os[0], os[1], os[2]});
    const double out_scale = params[kMaxBits].scale * cl.weights.scale;
    std::vector<std::int64_t> acc(spec.K);
    run.arrays.reserve(run.decisions.size());
    for (std::size_t w = 0; w < windows; ++w) {
        std::fill(acc.begin(), acc.end(), 0);
        for (std::size_t p = 0; p < positions; ++p) {
            const std::size_t g = w * positions + p;
            const int bits = run.decisions[g].bitwidth;
            const QuantParams& qp = params[bits];
            const std::span<const double> group(values.data() + g * depth, depth);
            const auto codes = uniform_quantize(group, qp, &run.saturations);
            const ProgrammedMatrix& m = cl.matrices[p];
            const auto dot = mvm(m, codes, bits, false, run.counters);
            for (std::size_t k = 0; k < spec.K; ++k) {
                const std::int64_t partial = dot[k] + static_cast<std::int64_t>(qp.zero_point) * cl.weight_sums[p][k];
                acc[k] += rescale_partial_sum(partial, bits, kMaxBits);
            }
            run.baseline_counters += mvm_cost(m, kMaxBits);
            run.arrays.push_back(static_cast<std::uint32_t>(m.array_count()));
            if (opts.track_rrmse && !all_zero(group)) {
                const auto back = dequantize(codes, qp);
                run.rrmse_sum += rrmse(group, back);
                run.rrmse_groups += 1;
            }
        }
        const std::size_t x = w / os[1];
        const std::size_t y = w % os[1];
        for (std::size_t k = 0; k < spec.K; ++k) {
            if (acc[k] > std::numeric_limits<std::int32_t>::max() || acc[k] < std::numeric_limits<std::int32_t>::min())
                throw Error("layer " + spec.name + ": 32-bit accumulator overflow");
            const double b = layer.bias.empty() ? 0.0 : layer.bias[k];
            out.at(x, y, k) = static_cast<double>(static_cast<std::int32_t>(acc[k])) / out_scale + b;
        }
    }
    return out;
}

} // namespace

InferenceResult forward_quantized(const CompiledNetwork& net, const std::vector<std::optional<ValueRange>>& ranges,
                                  const Tensor& input, const ForwardOptions& opts) {
    const Network& model = net.network();
    if (opts.redy.bins != net.bins()) throw ConfigError("redy bins differ from the bins the network was mapped with");
    opts.redy.validate();
    if (input.size() != model.input[0] * model.input[1] * model.input[2])
        throw ModelError("input tensor size does not match the network input shape");

    InferenceResult result;
    std::vector<Tensor> outputs;
    outputs.reserve(model.layers.size());
    Tensor cur = input.reshaped({model.input[0], model.input[1], model.input[2]});
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const Layer& layer = model.layers[i];
        const LayerSpec& spec = layer.spec;
        const Tensor in = as_layer_input(cur, spec);
        Tensor out;
        if (const CompiledLayer* cl = net.layer(i)) {
            if (i >= ranges.size() || !ranges[i])
                throw Error("missing calibration: no activation range for layer " + spec.name);
            LayerRun run;
            run.layer = i;
            run.redy_applied = cl->redy_applied;
            out = run_mac_layer(net, *cl, *ranges[i], in, opts, run);
            result.layers.push_back(std::move(run));
        } else if (spec.kind == LayerKind::pool_max || spec.kind == LayerKind::pool_avg) {
            out = pool_forward(in, spec);
        } else {
            out = in;
        }
        if (spec.add_from) {
            const Tensor& skip = outputs.at(*spec.add_from);
            for (std::size_t j = 0; j < out.size(); ++j) out[j] += skip[j];
        }
        for (double& v : out.data()) v = apply_activation(v, spec.activation);
        outputs.push_back(out);
        cur = std::move(out);
    }
    result.output = std::move(cur);
    return result;
}

} // namespace redy
