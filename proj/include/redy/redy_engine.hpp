#pragma once

#include "redy/quant.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace redy {

enum class HistogramMode { exact, exponent };

/// Bin layout shared by every group of one layer.
struct HistogramConfig {
    int bins = 8;
    std::vector<double> boundaries;          // bins-1 ascending edges over the layer range
    std::vector<int> exponent_boundaries;    // floor(log2|edge|) per edge
    double subsample_ratio = 0.10;

    /// Equal-width bins over range. Exponent thresholds derive from the same edges.
    static HistogramConfig for_range(ValueRange range, int bins, double subsample_ratio);

    /// Throws ConfigError naming the violated invariant.
    void validate() const;
};

struct GroupStats {
    std::vector<std::uint32_t> hist;
    std::uint32_t sampled_count = 0;
    double ed = 0.0;
    double du = 0.0;
};

/// Descending DU thresholds p1 > p2 > p3 > p4 > p5.
struct PrecisionThresholds {
    std::array<double, 5> p{1.40, 1.10, 0.80, 0.55, 0.35};

    /// Thresholds that send every group, including perfectly flat ones, to 8 bits.
    static PrecisionThresholds force_max();

    /// Rescales thresholds tuned for from_bins to the DU range of to_bins.
    PrecisionThresholds rescaled(int from_bins, int to_bins) const;

    /// Throws ConfigError unless strictly descending and below the DU maximum for bins.
    void validate(int bins) const;

    bool operator==(const PrecisionThresholds&) const = default;
};

struct GroupId {
    int layer = 0;
    int x = 0;
    int y = 0;
    int r = 0;
    int s = 0;

    auto operator<=>(const GroupId&) const = default;
};

struct PrecisionDecision {
    GroupId id;
    int bitwidth = kMaxBits;
    double du = 0.0;
};

/// Largest attainable DU for b bins: 2(b-1)/b.
double max_deviation(int bins);

/// Strided subsample indices: every k-th element, k = round(1/ratio).
std::size_t subsample_stride(double ratio);

GroupStats compute_histogram(std::span<const double> group, const HistogramConfig& cfg, HistogramMode mode);

/// Bin of a single value; exposed for oracles and the divergence report.
int bin_exact(double v, const HistogramConfig& cfg);
int bin_exponent(double v, const HistogramConfig& cfg);

/// DU = (1/N) * sum |hist[i] - N/b|. Throws std::invalid_argument on an empty group.
double deviation_from_uniform(const GroupStats& stats);

/// Bitwidth decoder. depth is the group's channel depth; depth < bins forces 8 bits.
int decide_precision(double du, int depth, const PrecisionThresholds& thresholds, int bins);

struct GroupQuantization {
    std::vector<std::int32_t> codes;
    PrecisionDecision decision;
    std::uint64_t saturations = 0;
};

/// Histogram, DU, decoder, then uniform quantization of the group at the decided bitwidth.
GroupQuantization redy_quantize_group(std::span<const double> group, ValueRange layer_range,
                                      const HistogramConfig& cfg, const PrecisionThresholds& thresholds,
                                      HistogramMode mode = HistogramMode::exact);

/// Fraction of groups whose bitwidth differs between two runs over the same group set.
double precision_variation(std::span<const PrecisionDecision> run_a, std::span<const PrecisionDecision> run_b);

/// Shuffles bitwidths among groups of the same layer; per-layer multisets are preserved.
std::vector<PrecisionDecision> random_precision_baseline(std::span<const PrecisionDecision> decisions,
                                                         std::uint64_t seed);

/// Share of groups at each bitwidth 0..8 (index = bits).
std::array<double, kMaxBits + 1> precision_breakdown(std::span<const PrecisionDecision> decisions);

} // namespace redy
