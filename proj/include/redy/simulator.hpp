#pragma once

#include "redy/cnn.hpp"
#include "redy/crossbar.hpp"
#include "redy/redy_engine.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace redy {

enum class QuantPolicy { static8, redy, random_baseline };

const char* to_string(QuantPolicy p);
QuantPolicy parse_policy(const std::string& s);
const char* to_string(HistogramMode m);
HistogramMode parse_histogram_mode(const std::string& s);

struct RedyConfig {
    int bins = 8;
    double subsample_ratio = 0.10;
    PrecisionThresholds thresholds;
    HistogramMode mode = HistogramMode::exact;

    void validate() const;
};

/// Symmetric per-layer weight quantization to signed weight_bits codes.
struct QuantizedWeights {
    double scale = 1.0;                // codes per unit of weight
    std::vector<std::int32_t> codes;   // same layout as the float weights (R, S, C, K)

    double value(std::size_t i) const { return codes[i] / scale; }
};

QuantizedWeights quantize_weights(const Tensor& weights, int weight_bits);

/// Static part of a MAC layer once it is mapped onto crossbars.
struct CompiledLayer {
    std::size_t index = 0;
    Mapping mapping = Mapping::channelwise;
    bool redy_applied = false;                      // false when depth < bins
    QuantizedWeights weights;
    std::vector<ProgrammedMatrix> matrices;         // one per (r,s) channelwise, one conventional
    std::vector<std::vector<std::int64_t>> weight_sums; // per matrix, per kernel: sum of weight codes

    std::size_t group_depth() const { return matrices.front().depth; }
    std::size_t arrays_per_group() const { return matrices.front().array_count(); }
};

/// Mapping rule: a layer whose group depth C is below the bin count keeps the
/// conventional mapping and static 8-bit activations.
Mapping layer_mapping(const LayerSpec& spec, int bins);
bool layer_uses_redy(const LayerSpec& spec, int bins);

class CompiledNetwork {
public:
    CompiledNetwork(const Network& net, const CrossbarConfig& cfg, int bins);

    const Network& network() const { return *net_; }
    const CrossbarConfig& crossbar() const { return cfg_; }
    int bins() const { return bins_; }
    /// Compiled view of layer i, or nullptr for layers without weights.
    const CompiledLayer* layer(std::size_t i) const { return layers_[i] ? &*layers_[i] : nullptr; }

private:
    const Network* net_;
    CrossbarConfig cfg_;
    int bins_;
    std::vector<std::optional<CompiledLayer>> layers_;
};

struct LayerRun {
    std::size_t layer = 0;
    bool redy_applied = false;
    std::vector<PrecisionDecision> decisions;
    std::vector<std::uint32_t> arrays;     // arrays activated per decision
    ActivityCounters counters;
    ActivityCounters baseline_counters;    // same layer at static 8 bits
    std::uint64_t saturations = 0;
    std::uint64_t histogram_samples = 0;
    std::uint64_t redy_decisions = 0;
    double rrmse_sum = 0.0;
    std::uint64_t rrmse_groups = 0;
};

struct InferenceResult {
    Tensor output;
    std::vector<LayerRun> layers;          // MAC layers only, in network order

    ActivityCounters counters() const;
    ActivityCounters baseline_counters() const;
    std::vector<PrecisionDecision> decisions() const;
};

struct ForwardOptions {
    QuantPolicy policy = QuantPolicy::redy;
    RedyConfig redy;
    std::uint64_t seed = 0;
    bool track_rrmse = true;
    // random_baseline only: permute the decisions this ReDy run made for the same
    // input, so both runs share per-layer precision multisets. Null: permute the
    // run's own ReDy decisions.
    const InferenceResult* reference = nullptr;
};

/// Fixed-point inference through the crossbar model. ranges holds the input
/// range of every layer (see calibrate_ranges); throws Error when a MAC layer
/// has none.
InferenceResult forward_quantized(const CompiledNetwork& net, const std::vector<std::optional<ValueRange>>& ranges,
                                  const Tensor& input, const ForwardOptions& opts);

} // namespace redy
