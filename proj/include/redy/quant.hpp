#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace redy {

inline constexpr int kMaxBits = 8;

/// Per-layer activation range.
struct ValueRange {
    double lo = 0.0;
    double hi = 0.0;

    bool valid() const { return lo <= hi; }
    double width() const { return hi - lo; }
};

/// Uniform quantizer parameters: code = clamp(round(v * scale) - zero_point).
///
/// scale counts levels per unit of value. Parameters built by make_params()
/// use scale = 2^bits / (hi - lo), so the scales of two bitwidths over the
/// same range differ by an exact power of two.
struct QuantParams {
    int bitwidth = kMaxBits;
    double scale = 1.0;
    std::int32_t zero_point = 0;
    std::int32_t clip_min = 0;
    std::int32_t clip_max = (1 << kMaxBits) - 1;

    bool valid() const;
};

QuantParams make_params(ValueRange range, int bitwidth);

/// Round to nearest, ties away from zero.
std::int64_t round_half_away(double v);

std::int32_t quantize_value(double v, const QuantParams& params, bool* saturated = nullptr);
double dequantize_value(std::int32_t code, const QuantParams& params);

/// Quantizes a sequence. Clipped elements are counted into *saturations when given.
std::vector<std::int32_t> uniform_quantize(std::span<const double> values, const QuantParams& params,
                                           std::uint64_t* saturations = nullptr);
std::vector<double> dequantize(std::span<const std::int32_t> codes, const QuantParams& params);

/// Relative RMS error, sqrt(mean((ref-approx)^2)) / sqrt(mean(ref^2)).
/// Throws std::invalid_argument on length mismatch or an all-zero reference.
double rrmse(std::span<const double> reference, std::span<const double> approx);

/// RRMSE of the quantize/dequantize round trip of values at bitwidth over range.
double round_trip_rrmse(std::span<const double> values, ValueRange range, int bitwidth);

} // namespace redy
