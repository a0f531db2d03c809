#include "redy/crossbar.hpp"

#include "redy/error.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace redy {

void CrossbarConfig::validate() const {
    if (rows <= 0 || cols <= 0) throw ConfigError("crossbar invariant violated: rows, cols > 0");
    if (cell_bits <= 0 || weight_bits <= 0 || weight_bits > 16)
        throw ConfigError("crossbar invariant violated: cell_bits > 0 and weight_bits in [1,16]");
    if (weight_bits % cell_bits != 0) throw ConfigError("crossbar invariant violated: weight_bits divisible by cell_bits");
    if (cell_bits > 8) throw ConfigError("crossbar invariant violated: cell_bits <= 8");
    if (slices() > cols) throw ConfigError("crossbar invariant violated: one weight must fit in a row");
    if (adc_bits <= 0 || adc_bits > 30) throw ConfigError("crossbar invariant violated: adc_bits in [1,30]");
    if (adcs_per_xbar <= 0) throw ConfigError("crossbar invariant violated: adcs_per_xbar > 0");
}

std::vector<std::uint8_t> weight_slices(std::uint32_t code, const CrossbarConfig& cfg) {
    const int n = cfg.slices();
    const std::uint32_t mask = (1u << cfg.cell_bits) - 1;
    std::vector<std::uint8_t> out(n);
    for (int i = 0; i < n; ++i) out[i] = static_cast<std::uint8_t>((code >> (cfg.cell_bits * (n - 1 - i))) & mask);
    return out;
}

ProgrammedMatrix program_weights(std::span<const std::int32_t> weights, std::size_t depth, std::size_t kernels,
                                 bool signed_weights, const CrossbarConfig& cfg) {
    cfg.validate();
    if (weights.size() != depth * kernels) throw std::invalid_argument("program_weights: weights must be depth x kernels");
    if (depth == 0 || kernels == 0) throw std::invalid_argument("program_weights: empty weight matrix");

    ProgrammedMatrix m;
    m.cfg = cfg;
    m.depth = depth;
    m.kernels = kernels;
    m.signed_weights = signed_weights;
    const std::size_t kpa = static_cast<std::size_t>(cfg.kernels_per_array());
    m.row_segments = (depth + cfg.rows - 1) / cfg.rows;
    m.col_segments = (kernels + kpa - 1) / kpa;

    const std::int64_t offset = m.weight_offset();
    const std::int64_t lo = signed_weights ? -offset : 0;
    const std::int64_t hi = signed_weights ? offset - 1 : (std::int64_t{1} << cfg.weight_bits) - 1;
    for (std::int32_t w : weights) {
        if (w < lo || w > hi)
            throw std::out_of_range("program_weights: weight code " + std::to_string(w) + " does not fit in " +
                                    std::to_string(cfg.weight_bits) + " bits");
    }

    const int slices = cfg.slices();
    for (std::size_t rs = 0; rs < m.row_segments; ++rs) {
        for (std::size_t cs = 0; cs < m.col_segments; ++cs) {
            ProgrammedArray a;
            a.row_offset = rs * cfg.rows;
            a.kernel_offset = cs * kpa;
            a.rows_used = static_cast<int>(std::min<std::size_t>(cfg.rows, depth - a.row_offset));
            a.kernels = std::min(kpa, kernels - a.kernel_offset);
            a.cols_used = static_cast<int>(a.kernels) * slices;
            a.cells.assign(static_cast<std::size_t>(cfg.rows) * cfg.cols, 0);
            for (int row = 0; row < a.rows_used; ++row) {
                for (std::size_t k = 0; k < a.kernels; ++k) {
                    const std::int64_t w = weights[(a.row_offset + row) * kernels + a.kernel_offset + k];
                    const auto digits = weight_slices(static_cast<std::uint32_t>(w + offset), cfg);
                    for (int sl = 0; sl < slices; ++sl)
                        a.cells[static_cast<std::size_t>(row) * cfg.cols + k * slices + sl] = digits[sl];
                }
            }
            m.arrays.push_back(std::move(a));
        }
    }
    return m;
}

std::int64_t adc_sample(std::int64_t column_sum, const CrossbarConfig& cfg) {
    switch (cfg.adc_mode) {
    case AdcMode::ideal: return column_sum;
    case AdcMode::clip: return std::min<std::int64_t>(column_sum, (std::int64_t{1} << cfg.adc_bits) - 1);
    case AdcMode::quantize: {
        const double full_scale = static_cast<double>(cfg.rows) * ((1 << cfg.cell_bits) - 1);
        const double levels = static_cast<double>((std::int64_t{1} << cfg.adc_bits) - 1);
        const double clamped = std::clamp(static_cast<double>(column_sum), 0.0, full_scale);
        const double level = std::round(clamped * levels / full_scale);
        return static_cast<std::int64_t>(std::round(level * full_scale / levels));
    }
    }
    return column_sum;
}

std::vector<std::int64_t> mvm_bit_serial(const ProgrammedArray& array, const CrossbarConfig& cfg,
                                         std::span<const std::int32_t> inputs, int input_bits,
                                         bool signed_inputs, ActivityCounters& counters) {
    if (static_cast<int>(inputs.size()) > cfg.rows) throw std::invalid_argument("mvm: input length exceeds rows");
    if (input_bits < 1 || input_bits > 16) throw std::invalid_argument("mvm: input bits must be in [1,16]");
    const std::int64_t in_lo = signed_inputs ? -(std::int64_t{1} << (input_bits - 1)) : 0;
    const std::int64_t in_hi =
        signed_inputs ? (std::int64_t{1} << (input_bits - 1)) - 1 : (std::int64_t{1} << input_bits) - 1;
    for (std::int32_t v : inputs) {
        if (v < in_lo || v > in_hi) throw std::out_of_range("mvm: input code does not fit in input bits");
    }

    const int slices = cfg.slices();
    const int cols = cfg.cols;
    const int rows = std::min<int>(static_cast<int>(inputs.size()), array.rows_used);
    const std::uint32_t mask = input_bits >= 32 ? ~0u : ((1u << input_bits) - 1);

    std::vector<std::int64_t> result(array.kernels, 0);
    std::vector<std::int32_t> col_sum(cols);
    for (int t = input_bits - 1; t >= 0; --t) {
        // Bit plane t drives the wordlines; each bitline accumulates bit * cell.
        std::fill(col_sum.begin(), col_sum.end(), 0);
        for (int row = 0; row < rows; ++row) {
            const std::uint32_t u = static_cast<std::uint32_t>(inputs[row]) & mask;
            if (((u >> t) & 1u) == 0) continue;
            const std::uint8_t* cell_row = &array.cells[static_cast<std::size_t>(row) * cols];
            for (int c = 0; c < array.cols_used; ++c) col_sum[c] += cell_row[c];
        }
        counters.crossbar_activations += 1;
        counters.adc_conversions += static_cast<std::uint64_t>(cols);
        counters.streamed_bits += static_cast<std::uint64_t>(array.rows_used);

        const std::int64_t plane_weight =
            (signed_inputs && t == input_bits - 1) ? -(std::int64_t{1} << t) : (std::int64_t{1} << t);
        for (std::size_t k = 0; k < array.kernels; ++k) {
            std::int64_t dot = 0;
            for (int sl = 0; sl < slices; ++sl) {
                const std::int64_t sensed = adc_sample(col_sum[k * slices + sl], cfg);
                dot += sensed << (cfg.cell_bits * (slices - 1 - sl));
            }
            result[k] += plane_weight * dot;
        }
    }
    return result;
}

std::vector<std::int64_t> mvm(const ProgrammedMatrix& m, std::span<const std::int32_t> inputs, int input_bits,
                              bool signed_inputs, ActivityCounters& counters) {
    if (inputs.size() != m.depth) throw std::invalid_argument("mvm: input length must equal matrix depth");
    std::vector<std::int64_t> out(m.kernels, 0);
    for (std::size_t rs = 0; rs < m.row_segments; ++rs) {
        const ProgrammedArray& first = m.array(rs, 0);
        const auto seg = inputs.subspan(first.row_offset, static_cast<std::size_t>(first.rows_used));
        for (std::size_t cs = 0; cs < m.col_segments; ++cs) {
            const ProgrammedArray& a = m.array(rs, cs);
            const auto part = mvm_bit_serial(a, m.cfg, seg, input_bits, signed_inputs, counters);
            for (std::size_t k = 0; k < a.kernels; ++k) out[a.kernel_offset + k] += part[k];
        }
    }
    if (m.signed_weights) {
        // Offset-binary correction from the input popcount column.
        std::int64_t input_sum = 0;
        for (std::int32_t v : inputs) input_sum += v;
        const std::int64_t correction = m.weight_offset() * input_sum;
        for (auto& v : out) v -= correction;
    }
    return out;
}

ActivityCounters mvm_cost(const ProgrammedMatrix& m, int input_bits) {
    ActivityCounters c;
    for (const auto& a : m.arrays) {
        c.crossbar_activations += static_cast<std::uint64_t>(input_bits);
        c.adc_conversions += static_cast<std::uint64_t>(input_bits) * static_cast<std::uint64_t>(m.cfg.cols);
        c.streamed_bits += static_cast<std::uint64_t>(input_bits) * static_cast<std::uint64_t>(a.rows_used);
    }
    return c;
}

std::int64_t rescale_partial_sum(std::int64_t value, int group_bits, int max_bits) {
    if (group_bits < 1 || group_bits > max_bits) throw std::invalid_argument("rescale: group bits out of range");
    return value * (std::int64_t{1} << (max_bits - group_bits));
}

} // namespace redy
