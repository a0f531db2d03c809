#pragma once

#include "redy/accel.hpp"
#include "redy/crossbar.hpp"
#include "redy/redy_engine.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace redy {

inline constexpr int kReportSchemaVersion = 1;

struct LayerSummary {
    std::size_t layer = 0;
    std::string name;
    bool redy_applied = false;
    std::uint64_t groups = 0;
    std::array<double, kMaxBits + 1> breakdown{}; // share of groups per bitwidth
    double average_bits = 0.0;
    ActivityCounters counters;
    ActivityCounters baseline;                    // static 8-bit counters for the same work
    double activity_reduction = 0.0;              // crossbar activations
    double adc_reduction = 0.0;                   // A/D conversions
    double mean_rrmse = 0.0;
    std::uint64_t saturations = 0;
};

struct PolicySummary {
    std::string policy;
    std::vector<LayerSummary> layers;
    LayerSummary total;
    double speedup = 1.0;
    std::size_t bottleneck_layer = 0;
    EnergyComparison energy;
    double precision_variation = 0.0;
    std::uint64_t redy_units = 0;
    std::vector<int> top_class;                    // argmax of each output
};

struct Report {
    std::string model;
    std::size_t inputs = 0;
    std::uint64_t seed = 0;
    int bins = 8;
    double subsample_ratio = 0.1;
    std::string histogram_mode = "exact";
    PrecisionThresholds thresholds;
    std::size_t total_arrays = 0;
    double memory_utilization = 0.0;
    std::vector<PolicySummary> policies;
};

/// Fills breakdown, average bits and reduction ratios from the raw fields.
void finish_summary(LayerSummary& s, std::uint64_t bits_sum);

nlohmann::ordered_json to_json(const Report& report);

/// Aligned-column tables: one per policy (layers + total), plus a side-by-side
/// totals table when several policies are present.
std::string to_text(const Report& report);

/// Writes <out_dir>/<stem>.json and <out_dir>/<stem>.txt. Throws Error when unwritable.
void emit_report(const Report& report, const std::filesystem::path& out_dir, const std::string& stem = "report");

} // namespace redy
