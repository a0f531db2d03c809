#include "redy/accel.hpp"

#include "redy/error.hpp"
#include "redy/simulator.hpp"

#include <algorithm>
#include <string>

namespace redy {

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) {
    return (a + b - 1) / b;
}

} // namespace

void ChipConfig::validate() const {
    if (apus_per_pe <= 0 || pes_per_tile <= 0 || tiles <= 0)
        throw ConfigError("chip invariant violated: apus_per_pe, pes_per_tile, tiles > 0");
}

void EnergyModel::validate() const {
    const double params[] = {e_xbar_event,           e_adc_conversion,       e_buffer_per_byte,
                             array_static_power,     chip_static_power,      redy_unit_area_um2,
                             redy_unit_latency_s,    redy_unit_static_power, redy_unit_dynamic_power};
    for (double p : params)
        if (!(p >= 0.0)) throw ConfigError("energy model invariant violated: all parameters >= 0");
    if (!(frequency_hz > 0.0)) throw ConfigError("energy model invariant violated: frequency > 0");
}

const LayerFloorplan* Floorplan::find(std::size_t layer) const {
    for (const auto& l : layers)
        if (l.layer == layer) return &l;
    return nullptr;
}

Floorplan build_floorplan(const Network& net, const CrossbarConfig& xbar, const ChipConfig& chip, int bins) {
    xbar.validate();
    chip.validate();
    net.shapes();
    Floorplan fp;
    double programmed = 0.0;
    const std::size_t kpa = static_cast<std::size_t>(xbar.kernels_per_array());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& spec = net.layers[i].spec;
        if (!spec.has_weights()) continue;
        LayerFloorplan lf;
        lf.layer = i;
        lf.mapping = layer_mapping(spec, bins);
        const std::size_t depth = lf.mapping == Mapping::channelwise ? spec.C : spec.R * spec.S * spec.C;
        lf.positions = lf.mapping == Mapping::channelwise ? spec.R * spec.S : 1;
        lf.row_segments = ceil_div(depth, static_cast<std::size_t>(xbar.rows));
        lf.col_segments = ceil_div(spec.K, kpa);
        lf.arrays = lf.positions * lf.row_segments * lf.col_segments;
        lf.pes = ceil_div(lf.arrays, static_cast<std::size_t>(chip.apus_per_pe));
        lf.tiles = ceil_div(lf.pes, static_cast<std::size_t>(chip.pes_per_tile));
        lf.first_tile = fp.total_tiles;
        const double cells = static_cast<double>(lf.positions) * depth * spec.K * xbar.slices();
        lf.utilization = cells / (static_cast<double>(lf.arrays) * xbar.rows * xbar.cols);
        programmed += cells;
        fp.total_arrays += lf.arrays;
        fp.total_tiles += lf.tiles;
        if (fp.total_tiles > static_cast<std::size_t>(chip.tiles))
            throw ModelError("layer " + spec.name + " exceeds chip capacity (" + std::to_string(chip.tiles) +
                             " tiles)");
        fp.layers.push_back(lf);
    }
    if (fp.total_arrays > 0)
        fp.memory_utilization = programmed / (static_cast<double>(fp.total_arrays) * xbar.rows * xbar.cols);
    return fp;
}

EnergyReport estimate_energy(const EnergyInputs& in, const Floorplan& floorplan, const EnergyModel& model) {
    EnergyReport e;
    e.xbar_j = static_cast<double>(in.counters.crossbar_activations) * model.e_xbar_event;
    e.adc_j = static_cast<double>(in.counters.adc_conversions) * model.e_adc_conversion;
    e.buffer_j = static_cast<double>(in.buffer_bytes) * model.e_buffer_per_byte;
    e.redy_dynamic_j = static_cast<double>(in.redy_samples + in.redy_decisions) * model.redy_op_energy();
    e.dynamic_j = e.xbar_j + e.adc_j + e.buffer_j + e.redy_dynamic_j;
    const double static_power = model.chip_static_power +
                                model.array_static_power * static_cast<double>(floorplan.total_arrays) +
                                model.redy_unit_static_power * static_cast<double>(in.redy_units);
    e.static_j = static_power * in.wall_cycles / model.frequency_hz;
    e.total_j = e.dynamic_j + e.static_j;
    return e;
}

EnergyComparison compare_energy(const EnergyInputs& policy, const EnergyInputs& baseline, const Floorplan& floorplan,
                                const EnergyModel& model) {
    EnergyComparison c;
    c.policy = estimate_energy(policy, floorplan, model);
    c.baseline = estimate_energy(baseline, floorplan, model);
    c.normalized = c.baseline.total_j > 0.0 ? c.policy.total_j / c.baseline.total_j : 1.0;
    c.savings = 1.0 - c.normalized;
    return c;
}

PipelineEstimate estimate_pipeline(const Network& net, const Floorplan& floorplan, const CrossbarConfig& xbar,
                                   std::span<const double> per_layer_avg_bits, int bins) {
    const auto shapes = net.shapes();
    const double mux_steps = static_cast<double>(ceil_div(static_cast<std::size_t>(xbar.cols),
                                                          static_cast<std::size_t>(xbar.adcs_per_xbar)));
    PipelineEstimate est;
    for (const LayerFloorplan& lf : floorplan.layers) {
        const LayerSpec& spec = net.layers.at(lf.layer).spec;
        LayerLatency ll;
        ll.layer = lf.layer;
        ll.redy_applied = layer_uses_redy(spec, bins);
        ll.avg_bits = ll.redy_applied && lf.layer < per_layer_avg_bits.size() ? per_layer_avg_bits[lf.layer] : 8.0;
        const double windows = static_cast<double>(shapes[lf.layer][0] * shapes[lf.layer][1]);
        const double per_bit = windows * static_cast<double>(lf.positions) *
                               static_cast<double>(lf.arrays_per_group()) * mux_steps;
        ll.cycles = per_bit * ll.avg_bits;
        ll.baseline_cycles = per_bit * 8.0;
        if (ll.cycles > est.bottleneck_cycles) {
            est.bottleneck_cycles = ll.cycles;
            est.bottleneck_layer = ll.layer;
        }
        est.baseline_bottleneck_cycles = std::max(est.baseline_bottleneck_cycles, ll.baseline_cycles);
        est.layers.push_back(ll);
    }
    if (est.bottleneck_cycles > 0.0) {
        est.throughput = 1.0 / est.bottleneck_cycles;
        est.speedup = est.baseline_bottleneck_cycles / est.bottleneck_cycles;
    }
    return est;
}

std::size_t redy_unit_count(const LayerSpec& spec, int bins) {
    if (!layer_uses_redy(spec, bins)) return 0;
    return spec.stride * spec.R * spec.S;
}

std::size_t redy_unit_count(const Network& net, int bins) {
    std::size_t total = 0;
    for (const auto& l : net.layers) total += redy_unit_count(l.spec, bins);
    return total;
}

} // namespace redy
