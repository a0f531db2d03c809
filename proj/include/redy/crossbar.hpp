#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace redy {

enum class AdcMode { ideal, clip, quantize };

struct CrossbarConfig {
    int rows = 128;
    int cols = 128;
    int cell_bits = 2;
    int weight_bits = 8;
    int adc_bits = 5;
    int adcs_per_xbar = 16;
    AdcMode adc_mode = AdcMode::ideal;

    int slices() const { return weight_bits / cell_bits; }
    int kernels_per_array() const { return cols / slices(); }

    /// Throws ConfigError naming the violated invariant.
    void validate() const;
};

/// Events charged by the crossbar model. Addition is the merge operation.
///
/// One crossbar activation is one bit plane applied to one physical array.
/// Every activation senses all cols bitlines, so adc_conversions is always
/// cols * crossbar_activations. streamed_bits counts wordline bits driven.
struct ActivityCounters {
    std::uint64_t crossbar_activations = 0;
    std::uint64_t adc_conversions = 0;
    std::uint64_t streamed_bits = 0;

    ActivityCounters& operator+=(const ActivityCounters& o) {
        crossbar_activations += o.crossbar_activations;
        adc_conversions += o.adc_conversions;
        streamed_bits += o.streamed_bits;
        return *this;
    }
    friend ActivityCounters operator+(ActivityCounters a, const ActivityCounters& b) { return a += b; }
    bool operator==(const ActivityCounters&) const = default;
};

/// One physical array. Column c holds slice (c % slices) of kernel
/// kernel_offset + c / slices, most-significant slice first.
struct ProgrammedArray {
    int rows_used = 0;
    int cols_used = 0;
    std::size_t row_offset = 0;
    std::size_t kernel_offset = 0;
    std::size_t kernels = 0;
    std::vector<std::uint8_t> cells; // rows x cols, row-major; unused cells are 0

    std::uint8_t cell(int row, int col, int cols) const { return cells[static_cast<std::size_t>(row) * cols + col]; }
};

/// A depth x kernels weight matrix spread over row_segments x col_segments arrays.
struct ProgrammedMatrix {
    CrossbarConfig cfg;
    std::size_t depth = 0;
    std::size_t kernels = 0;
    bool signed_weights = false;
    std::size_t row_segments = 0;
    std::size_t col_segments = 0;
    std::vector<ProgrammedArray> arrays; // row segment major

    const ProgrammedArray& array(std::size_t row_seg, std::size_t col_seg) const {
        return arrays[row_seg * col_segments + col_seg];
    }
    std::size_t array_count() const { return arrays.size(); }
    /// Offset-binary bias added to signed weight codes, 2^(weight_bits-1).
    std::int64_t weight_offset() const { return signed_weights ? std::int64_t{1} << (cfg.weight_bits - 1) : 0; }
};

/// Splits weight codes into cell slices. weights is depth x kernels row-major.
/// Signed weights are stored offset-binary (code + 2^(weight_bits-1)).
ProgrammedMatrix program_weights(std::span<const std::int32_t> weights, std::size_t depth, std::size_t kernels,
                                 bool signed_weights, const CrossbarConfig& cfg);

/// Cell digits of one weight code, MSB slice first.
std::vector<std::uint8_t> weight_slices(std::uint32_t code, const CrossbarConfig& cfg);

std::int64_t adc_sample(std::int64_t column_sum, const CrossbarConfig& cfg);

/// Bit-serial product over a single array: sum_rows input * stored_code for every
/// kernel of the array, before any offset-binary correction.
std::vector<std::int64_t> mvm_bit_serial(const ProgrammedArray& array, const CrossbarConfig& cfg,
                                         std::span<const std::int32_t> inputs, int input_bits,
                                         bool signed_inputs, ActivityCounters& counters);

/// Signed dot products of inputs (length depth) against every kernel of the matrix.
std::vector<std::int64_t> mvm(const ProgrammedMatrix& matrix, std::span<const std::int32_t> inputs, int input_bits,
                              bool signed_inputs, ActivityCounters& counters);

/// Counter increments mvm() would charge, without simulating.
ActivityCounters mvm_cost(const ProgrammedMatrix& matrix, int input_bits);

/// Scales a partial sum computed at group_bits to the max_bits domain.
std::int64_t rescale_partial_sum(std::int64_t value, int group_bits, int max_bits = 8);

} // namespace redy
