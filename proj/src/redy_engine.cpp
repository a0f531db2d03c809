#include "redy/redy_engine.hpp"

#include "redy/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <string>

namespace redy {

namespace {

constexpr double kMinEdgeMagnitude = 0x1p-126;

int exponent_of(double v) {
    return std::ilogb(std::max(std::abs(v), kMinEdgeMagnitude));
}

} // namespace

HistogramConfig HistogramConfig::for_range(ValueRange range, int bins, double subsample_ratio) {
    if (bins < 2) throw ConfigError("histogram requires bins >= 2");
    HistogramConfig cfg;
    cfg.bins = bins;
    cfg.subsample_ratio = subsample_ratio;
    double width = range.width();
    if (width <= 0.0) width = std::max(std::abs(range.lo), 1.0);
    cfg.boundaries.reserve(bins - 1);
    cfg.exponent_boundaries.reserve(bins - 1);
    for (int j = 1; j < bins; ++j) {
        const double edge = range.lo + width * j / bins;
        cfg.boundaries.push_back(edge);
        cfg.exponent_boundaries.push_back(exponent_of(edge));
    }
    return cfg;
}

void HistogramConfig::validate() const {
    if (bins < 2) throw ConfigError("histogram invariant violated: bins >= 2");
    if (static_cast<int>(boundaries.size()) != bins - 1 || static_cast<int>(exponent_boundaries.size()) != bins - 1)
        throw ConfigError("histogram invariant violated: bins-1 boundaries required");
    for (std::size_t i = 1; i < boundaries.size(); ++i) {
        if (!(boundaries[i - 1] < boundaries[i]))
            throw ConfigError("histogram invariant violated: boundaries strictly ascending");
        if (exponent_boundaries[i - 1] > exponent_boundaries[i])
            throw ConfigError("histogram invariant violated: exponent boundaries non-decreasing");
    }
    if (!(subsample_ratio > 0.0 && subsample_ratio <= 1.0))
        throw ConfigError("histogram invariant violated: subsample_ratio in (0,1]");
}

PrecisionThresholds PrecisionThresholds::force_max() {
    return PrecisionThresholds{{-1.0, -2.0, -3.0, -4.0, -5.0}};
}

PrecisionThresholds PrecisionThresholds::rescaled(int from_bins, int to_bins) const {
    PrecisionThresholds out = *this;
    const double factor = max_deviation(to_bins) / max_deviation(from_bins);
    for (double& p : out.p) p *= factor;
    return out;
}

void PrecisionThresholds::validate(int bins) const {
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (!(p[i - 1] > p[i])) throw ConfigError("threshold invariant violated: p1 > p2 > p3 > p4 > p5");
    }
    if (!(p[0] < max_deviation(bins))) throw ConfigError("threshold invariant violated: p1 < 2(b-1)/b");
}

double max_deviation(int bins) {
    return 2.0 * (bins - 1) / bins;
}

std::size_t subsample_stride(double ratio) {
    if (!(ratio > 0.0 && ratio <= 1.0)) throw std::invalid_argument("subsample ratio must be in (0,1]");
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(1.0 / ratio)));
}

int bin_exact(double v, const HistogramConfig& cfg) {
    return static_cast<int>(std::upper_bound(cfg.boundaries.begin(), cfg.boundaries.end(), v) -
                            cfg.boundaries.begin());
}

int bin_exponent(double v, const HistogramConfig& cfg) {
    if (v == 0.0) return 0;
    const int e = std::ilogb(std::abs(v));
    return static_cast<int>(std::upper_bound(cfg.exponent_boundaries.begin(), cfg.exponent_boundaries.end(), e) -
                            cfg.exponent_boundaries.begin());
}

GroupStats compute_histogram(std::span<const double> group, const HistogramConfig& cfg, HistogramMode mode) {
    if (group.empty()) throw std::invalid_argument("empty group");
    GroupStats stats;
    stats.hist.assign(cfg.bins, 0);
    const std::size_t stride = subsample_stride(cfg.subsample_ratio);
    for (std::size_t i = 0; i < group.size(); i += stride) {
        const int b = mode == HistogramMode::exact ? bin_exact(group[i], cfg) : bin_exponent(group[i], cfg);
        ++stats.hist[b];
        ++stats.sampled_count;
    }
    stats.ed = static_cast<double>(stats.sampled_count) / cfg.bins;
    return stats;
}

double deviation_from_uniform(const GroupStats& stats) {
    if (stats.sampled_count == 0) throw std::invalid_argument("empty group");
    // Integer form of sum |h - N/b| / N keeps the extreme cases exact.
    const std::int64_t n = stats.sampled_count;
    const std::int64_t b = static_cast<std::int64_t>(stats.hist.size());
    std::int64_t acc = 0;
    for (std::uint32_t h : stats.hist) acc += std::llabs(b * static_cast<std::int64_t>(h) - n);
    return static_cast<double>(acc) / static_cast<double>(b * n);
}

int decide_precision(double du, int depth, const PrecisionThresholds& thresholds, int bins) {
    if (depth < bins) return kMaxBits;
    if (!(du >= 0.0 && du <= max_deviation(bins))) throw std::invalid_argument("invalid DU");
    const auto& p = thresholds.p;
    if (du > p[0]) return 8;
    if (du > p[1]) return 7;
    if (du > p[2]) return 6;
    if (du > p[3]) return 5;
    if (du > p[4]) return 4;
    return 3;
}

GroupQuantization redy_quantize_group(std::span<const double> group, ValueRange layer_range,
                                      const HistogramConfig& cfg, const PrecisionThresholds& thresholds,
                                      HistogramMode mode) {
    GroupQuantization out;
    const int depth = static_cast<int>(group.size());
    if (depth >= cfg.bins) {
        const GroupStats stats = compute_histogram(group, cfg, mode);
        out.decision.du = deviation_from_uniform(stats);
    }
    out.decision.bitwidth = decide_precision(out.decision.du, depth, thresholds, cfg.bins);
    out.codes = uniform_quantize(group, make_params(layer_range, out.decision.bitwidth), &out.saturations);
    return out;
}

double precision_variation(std::span<const PrecisionDecision> run_a, std::span<const PrecisionDecision> run_b) {
    if (run_a.size() != run_b.size()) throw std::invalid_argument("precision_variation: mismatched group sets");
    if (run_a.empty()) return 0.0;
    std::map<GroupId, int> bits_a;
    for (const auto& d : run_a) bits_a.emplace(d.id, d.bitwidth);
    std::size_t changed = 0;
    for (const auto& d : run_b) {
        const auto it = bits_a.find(d.id);
        if (it == bits_a.end()) throw std::invalid_argument("precision_variation: mismatched group sets");
        changed += it->second != d.bitwidth ? 1 : 0;
    }
    return static_cast<double>(changed) / static_cast<double>(run_a.size());
}

std::vector<PrecisionDecision> random_precision_baseline(std::span<const PrecisionDecision> decisions,
                                                         std::uint64_t seed) {
    std::vector<PrecisionDecision> out(decisions.begin(), decisions.end());
    std::map<int, std::vector<std::size_t>> by_layer;
    for (std::size_t i = 0; i < out.size(); ++i) by_layer[out[i].id.layer].push_back(i);

    std::mt19937_64 rng(seed);
    for (auto& [layer, idx] : by_layer) {
        std::vector<int> bits;
        bits.reserve(idx.size());
        for (std::size_t i : idx) bits.push_back(out[i].bitwidth);
        // Fisher-Yates with an explicit draw so the permutation does not depend on the stdlib.
        for (std::size_t i = bits.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng() % i);
            std::swap(bits[i - 1], bits[j]);
        }
        for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]].bitwidth = bits[k];
    }
    return out;
}

std::array<double, kMaxBits + 1> precision_breakdown(std::span<const PrecisionDecision> decisions) {
    std::array<double, kMaxBits + 1> share{};
    if (decisions.empty()) return share;
    for (const auto& d : decisions) share[d.bitwidth] += 1.0;
    for (double& s : share) s /= static_cast<double>(decisions.size());
    return share;
}

} // namespace redy
