#pragma once

#include "redy/cnn.hpp"
#include "redy/redy_engine.hpp"
#include "redy/simulator.hpp"

#include <array>
#include <optional>
#include <vector>

namespace redy {

/// Min/max merge table for per-layer input ranges. Merging is associative and
/// commutative, so shards can be combined in any order.
class RangeTable {
public:
    explicit RangeTable(std::size_t layers = 0) : ranges_(layers) {}

    void observe(std::size_t layer, std::span<const double> values);
    void merge(const RangeTable& other);
    const std::vector<std::optional<ValueRange>>& ranges() const { return ranges_; }

private:
    std::vector<std::optional<ValueRange>> ranges_;
};

/// Exact min/max of every layer's input activations over the calibration set.
/// Layers with zero padding also cover 0.
/// Throws std::invalid_argument on an empty set.
std::vector<std::optional<ValueRange>> calibrate_ranges(const Network& net, std::span<const Tensor> inputs);

/// DU and round-trip RRMSE at every candidate bitwidth for one calibration group.
struct GroupProfile {
    double du = 0.0;
    std::array<double, kMaxBits + 1> rrmse{}; // index = bits (3..8 used)
};

/// Profiles of every ReDy-eligible, non-zero group seen on the float path.
std::vector<GroupProfile> profile_groups(const Network& net, const std::vector<std::optional<ValueRange>>& ranges,
                                         std::span<const Tensor> inputs, const RedyConfig& cfg);

struct ThresholdCalibration {
    PrecisionThresholds thresholds;
    bool feasible = true;         // false: no tuple met the budget, thresholds force 8 bits
    double average_bits = 8.0;
    double mean_rrmse = 0.0;
    std::size_t groups = 0;
};

/// Default candidate grid: 0.05 .. 1.70 in 0.05 steps, scaled to the DU range of bins.
std::vector<double> default_threshold_grid(int bins);

/// Bitwidth of each profile under thresholds (groups are all ReDy-eligible).
int profile_bits(const GroupProfile& g, const PrecisionThresholds& t, int bins);

/// Exhaustive search over strictly descending 5-tuples drawn from grid. Minimizes
/// the mean assigned bitwidth subject to mean group RRMSE <= budget; ties go to
/// the lexicographically smallest (p1, ..., p5).
ThresholdCalibration calibrate_thresholds(std::span<const GroupProfile> groups, double error_budget,
                                          std::span<const double> grid, int bins);

ThresholdCalibration calibrate_thresholds(const Network& net, const std::vector<std::optional<ValueRange>>& ranges,
                                          std::span<const Tensor> inputs, const RedyConfig& cfg,
                                          double error_budget);

/// ReDy decisions for every eligible group of one input on the float path, in
/// extraction order.
std::vector<PrecisionDecision> float_path_decisions(const Network& net,
                                                    const std::vector<std::optional<ValueRange>>& ranges,
                                                    const Tensor& input, const RedyConfig& cfg);

} // namespace redy
