#pragma once

#include "redy/cnn.hpp"
#include "redy/crossbar.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace redy {

/// APU/PE/Tile/Chip hierarchy sizes. One APU holds one crossbar array.
struct ChipConfig {
    int apus_per_pe = 8;
    int pes_per_tile = 4;
    int tiles = 1024;

    int arrays_per_tile() const { return apus_per_pe * pes_per_tile; }
    void validate() const;
};

struct LayerFloorplan {
    std::size_t layer = 0;
    Mapping mapping = Mapping::channelwise;
    std::size_t positions = 1;        // matrices per layer: R*S channelwise, 1 conventional
    std::size_t row_segments = 0;
    std::size_t col_segments = 0;
    std::size_t arrays = 0;           // positions * row_segments * col_segments
    std::size_t pes = 0;
    std::size_t tiles = 0;
    std::size_t first_tile = 0;
    double utilization = 0.0;         // programmed cells / cells of the arrays used

    std::size_t arrays_per_group() const { return row_segments * col_segments; }
};

struct Floorplan {
    std::vector<LayerFloorplan> layers; // MAC layers only
    std::size_t total_arrays = 0;
    std::size_t total_tiles = 0;
    double memory_utilization = 0.0;

    const LayerFloorplan* find(std::size_t layer) const;
};

/// Array counts per MAC layer, packed greedily into whole tiles in layer order.
/// Throws ModelError when the network does not fit the configured chip.
Floorplan build_floorplan(const Network& net, const CrossbarConfig& xbar, const ChipConfig& chip, int bins);

/// Energy constants. Joules per event, watts for static terms.
struct EnergyModel {
    double e_xbar_event = 2.0e-12;          // one bit plane on one 128x128 array
    double e_adc_conversion = 0.5e-12;      // one 5-bit conversion
    double e_buffer_per_byte = 0.0;
    double array_static_power = 1.0e-6;     // per programmed array
    double chip_static_power = 5.0e-3;
    double redy_unit_area_um2 = 768.8;
    double redy_unit_latency_s = 2.19e-9;
    double redy_unit_static_power = 9.3e-6;
    double redy_unit_dynamic_power = 62.9e-6;
    double frequency_hz = 400e6;

    /// Energy of one ReDy-unit operation: dynamic power times unit latency.
    double redy_op_energy() const { return redy_unit_dynamic_power * redy_unit_latency_s; }
    void validate() const;
};

/// Workload-side inputs of the energy model for one policy.
struct EnergyInputs {
    ActivityCounters counters;
    std::uint64_t buffer_bytes = 0;
    std::uint64_t redy_samples = 0;     // histogram samples binned by ReDy units
    std::uint64_t redy_decisions = 0;   // groups decoded by ReDy units
    double wall_cycles = 0.0;
    std::size_t redy_units = 0;
};

struct EnergyReport {
    double xbar_j = 0.0;
    double adc_j = 0.0;
    double buffer_j = 0.0;
    double redy_dynamic_j = 0.0;
    double dynamic_j = 0.0;
    double static_j = 0.0;
    double total_j = 0.0;
};

EnergyReport estimate_energy(const EnergyInputs& in, const Floorplan& floorplan, const EnergyModel& model);

struct EnergyComparison {
    EnergyReport policy;
    EnergyReport baseline;
    double normalized = 1.0;   // policy total / baseline total
    double savings = 0.0;      // 1 - normalized
};

EnergyComparison compare_energy(const EnergyInputs& policy, const EnergyInputs& baseline, const Floorplan& floorplan,
                                const EnergyModel& model);

struct LayerLatency {
    std::size_t layer = 0;
    bool redy_applied = false;
    double avg_bits = 8.0;
    double cycles = 0.0;
    double baseline_cycles = 0.0;
};

struct PipelineEstimate {
    std::vector<LayerLatency> layers;
    std::size_t bottleneck_layer = 0;
    double bottleneck_cycles = 0.0;
    double baseline_bottleneck_cycles = 0.0;
    double throughput = 0.0;   // inferences per cycle in steady state
    double speedup = 1.0;
};

/// Layer latency = windows * groups per window * avg bits * arrays per group *
/// ADC mux steps per plane. Layers that skip ReDy stay at 8 bits. per_layer_avg_bits
/// is indexed by network layer; entries of non-MAC layers are ignored.
PipelineEstimate estimate_pipeline(const Network& net, const Floorplan& floorplan, const CrossbarConfig& xbar,
                                   std::span<const double> per_layer_avg_bits, int bins);

/// ReDy units needed to avoid stalls: stride * R * S, or 0 when ReDy is not applied.
std::size_t redy_unit_count(const LayerSpec& spec, int bins);
std::size_t redy_unit_count(const Network& net, int bins);

} // namespace redy
