#include "redy/calibration.hpp"

#include "redy/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace redy {

void RangeTable::observe(std::size_t layer, std::span<const double> values) {
    if (values.empty()) return;
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    auto& r = ranges_.at(layer);
    if (!r) {
        r = ValueRange{*mn, *mx};
    } else {
        r->lo = std::min(r->lo, *mn);
        r->hi = std::max(r->hi, *mx);
    }
}

void RangeTable::merge(const RangeTable& other) {
    if (other.ranges_.size() != ranges_.size()) throw std::invalid_argument("RangeTable::merge: layer count mismatch");
    for (std::size_t i = 0; i < ranges_.size(); ++i) {
        if (!other.ranges_[i]) continue;
        const std::array<double, 2> both{other.ranges_[i]->lo, other.ranges_[i]->hi};
        observe(i, both);
    }
}

std::vector<std::optional<ValueRange>> calibrate_ranges(const Network& net, std::span<const Tensor> inputs) {
    if (inputs.empty()) throw std::invalid_argument("calibrate_ranges: empty calibration set");
    RangeTable table(net.layers.size());
    for (const Tensor& input : inputs) {
        const auto layer_in = layer_inputs_float(net, input);
        for (std::size_t i = 0; i < layer_in.size(); ++i) {
            table.observe(i, layer_in[i].data());
            // Zero padding is part of what the layer's groups quantize.
            if (net.layers[i].spec.has_weights() && net.layers[i].spec.padding > 0) {
                const double zero = 0.0;
                table.observe(i, std::span<const double>(&zero, 1));
            }
        }
    }
    return table.ranges();
}

namespace {

template <typename Fn>
void for_each_eligible_group(const Network& net, const std::vector<std::optional<ValueRange>>& ranges,
                             const Tensor& input, const RedyConfig& cfg, Fn&& fn) {
    const auto layer_in = layer_inputs_float(net, input);
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& spec = net.layers[i].spec;
        if (!layer_uses_redy(spec, cfg.bins)) continue;
        if (i >= ranges.size() || !ranges[i]) throw Error("missing calibration: no activation range for layer " + spec.name);
        const HistogramConfig hcfg = HistogramConfig::for_range(*ranges[i], cfg.bins, cfg.subsample_ratio);
        for (const auto& g : extract_groups(layer_in[i], spec, Mapping::channelwise)) fn(i, *ranges[i], hcfg, g);
    }
}

} // namespace

std::vector<GroupProfile> profile_groups(const Network& net, const std::vector<std::optional<ValueRange>>& ranges,
                                         std::span<const Tensor> inputs, const RedyConfig& cfg) {
    std::vector<GroupProfile> out;
    for (const Tensor& input : inputs) {
        for_each_eligible_group(net, ranges, input, cfg,
                                [&](std::size_t, const ValueRange& range, const HistogramConfig& hcfg,
                                    const ActivationGroup& g) {
                                    if (std::all_of(g.values.begin(), g.values.end(), [](double v) { return v == 0.0; }))
                                        return;
                                    GroupProfile p;
                                    p.du = deviation_from_uniform(compute_histogram(g.values, hcfg, cfg.mode));
                                    for (int b = 3; b <= kMaxBits; ++b) p.rrmse[b] = round_trip_rrmse(g.values, range, b);
                                    out.push_back(p);
                                });
    }
    return out;
}

std::vector<PrecisionDecision> float_path_decisions(const Network& net,
                                                    const std::vector<std::optional<ValueRange>>& ranges,
                                                    const Tensor& input, const RedyConfig& cfg) {
    std::vector<PrecisionDecision> out;
    for_each_eligible_group(net, ranges, input, cfg,
                            [&](std::size_t layer, const ValueRange&, const HistogramConfig& hcfg,
                                const ActivationGroup& g) {
                                PrecisionDecision d;
                                d.id = GroupId{static_cast<int>(layer), static_cast<int>(g.x), static_cast<int>(g.y),
                                               static_cast<int>(g.r), static_cast<int>(g.s)};
                                d.du = deviation_from_uniform(compute_histogram(g.values, hcfg, cfg.mode));
                                d.bitwidth =
                                    decide_precision(d.du, static_cast<int>(g.values.size()), cfg.thresholds, cfg.bins);
                                out.push_back(d);
                            });
    return out;
}

std::vector<double> default_threshold_grid(int bins) {
    const double factor = max_deviation(bins) / max_deviation(8);
    std::vector<double> grid;
    for (int k = 1; k <= 34; ++k) grid.push_back(k / 20.0 * factor);
    return grid;
}

int profile_bits(const GroupProfile& g, const PrecisionThresholds& t, int bins) {
    return decide_precision(g.du, bins, t, bins);
}

ThresholdCalibration calibrate_thresholds(std::span<const GroupProfile> groups, double error_budget,
                                          std::span<const double> grid_in, int bins) {
    if (!(error_budget >= 0.0)) throw std::invalid_argument("calibrate_thresholds: budget must be non-negative");
    std::vector<double> grid(grid_in.begin(), grid_in.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const double dmax = max_deviation(bins);
    grid.erase(std::remove_if(grid.begin(), grid.end(), [&](double p) { return !(p > 0.0 && p < dmax); }), grid.end());
    if (grid.size() < 5) throw std::invalid_argument("calibrate_thresholds: grid needs at least 5 values in (0, DUmax)");

    ThresholdCalibration best;
    best.groups = groups.size();
    if (groups.empty()) return best;

    std::vector<GroupProfile> sorted(groups.begin(), groups.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.du < b.du; });
    const std::size_t n = sorted.size();

    // prefix[b][i]: sum of rrmse at b bits over the i lowest-DU groups.
    std::array<std::vector<double>, kMaxBits + 1> prefix;
    for (int b = 3; b <= kMaxBits; ++b) {
        prefix[b].assign(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) prefix[b][i + 1] = prefix[b][i] + sorted[i].rrmse[b];
    }
    // below[j]: groups with du <= grid[j].
    std::vector<std::size_t> below(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        below[j] = static_cast<std::size_t>(
            std::upper_bound(sorted.begin(), sorted.end(), grid[j], [](double v, const auto& g) { return v < g.du; }) -
            sorted.begin());
    }

    bool found = false;
    std::uint64_t best_bits = std::numeric_limits<std::uint64_t>::max();
    std::array<std::size_t, 5> best_idx{};
    double best_err = 0.0;
    const std::size_t G = grid.size();
    // Indices i1 > i2 > i3 > i4 > i5 into the ascending grid give p1 > ... > p5.
    for (std::size_t i1 = 4; i1 < G; ++i1)
        for (std::size_t i2 = 3; i2 < i1; ++i2)
            for (std::size_t i3 = 2; i3 < i2; ++i3)
                for (std::size_t i4 = 1; i4 < i3; ++i4)
                    for (std::size_t i5 = 0; i5 < i4; ++i5) {
                        // Cut points in DU order: [0,c5) -> 3 bits, ..., [c1,n) -> 8 bits.
                        const std::array<std::size_t, 7> cut{0, below[i5], below[i4], below[i3], below[i2], below[i1], n};
                        std::uint64_t bits = 0;
                        double err = 0.0;
                        for (int k = 0; k < 6; ++k) {
                            const int b = 3 + k;
                            bits += static_cast<std::uint64_t>(b) * (cut[k + 1] - cut[k]);
                            err += prefix[b][cut[k + 1]] - prefix[b][cut[k]];
                        }
                        if (err / static_cast<double>(n) > error_budget) continue;
                        const std::array<std::size_t, 5> idx{i1, i2, i3, i4, i5};
                        if (!found || bits < best_bits || (bits == best_bits && idx < best_idx)) {
                            found = true;
                            best_bits = bits;
                            best_idx = idx;
                            best_err = err;
                        }
                    }

    if (!found) {
        best.feasible = false;
        best.thresholds = PrecisionThresholds::force_max();
        best.average_bits = kMaxBits;
        best.mean_rrmse = (prefix[kMaxBits][n]) / static_cast<double>(n);
        return best;
    }
    for (int k = 0; k < 5; ++k) best.thresholds.p[k] = grid[best_idx[k]];
    best.average_bits = static_cast<double>(best_bits) / static_cast<double>(n);
    best.mean_rrmse = best_err / static_cast<double>(n);
    return best;
}

ThresholdCalibration calibrate_thresholds(const Network& net, const std::vector<std::optional<ValueRange>>& ranges,
                                          std::span<const Tensor> inputs, const RedyConfig& cfg,
                                          double error_budget) {
    if (inputs.empty()) throw std::invalid_argument("calibrate_thresholds: empty calibration set");
    const auto profiles = profile_groups(net, ranges, inputs, cfg);
    const auto grid = default_threshold_grid(cfg.bins);
    return calibrate_thresholds(profiles, error_budget, grid, cfg.bins);
}

} // namespace redy
