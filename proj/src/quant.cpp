#include "redy/quant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace redy {

bool QuantParams::valid() const {
    if (bitwidth < 1 || bitwidth > kMaxBits) return false;
    if (!(scale > 0.0) || !std::isfinite(scale)) return false;
    return clip_min == 0 && clip_max == (1 << bitwidth) - 1;
}

QuantParams make_params(ValueRange range, int bitwidth) {
    if (bitwidth < 1 || bitwidth > kMaxBits) throw std::invalid_argument("bitwidth must be in [1,8]");
    if (!range.valid()) throw std::invalid_argument("value range requires lo <= hi");
    double width = range.width();
    // A collapsed range still needs a finite scale.
    if (width <= 0.0) width = std::max(std::abs(range.lo), 1.0);

    QuantParams p;
    p.bitwidth = bitwidth;
    p.scale = std::ldexp(1.0, bitwidth) / width;
    p.zero_point = static_cast<std::int32_t>(round_half_away(range.lo * p.scale));
    p.clip_min = 0;
    p.clip_max = (1 << bitwidth) - 1;
    return p;
}

std::int64_t round_half_away(double v) {
    return static_cast<std::int64_t>(std::round(v));
}

std::int32_t quantize_value(double v, const QuantParams& params, bool* saturated) {
    const std::int64_t raw = round_half_away(v * params.scale) - params.zero_point;
    const std::int64_t code = std::clamp<std::int64_t>(raw, params.clip_min, params.clip_max);
    if (saturated) *saturated = code != raw;
    return static_cast<std::int32_t>(code);
}

double dequantize_value(std::int32_t code, const QuantParams& params) {
    return (static_cast<double>(code) + params.zero_point) / params.scale;
}

std::vector<std::int32_t> uniform_quantize(std::span<const double> values, const QuantParams& params,
                                           std::uint64_t* saturations) {
    std::vector<std::int32_t> codes(values.size());
    std::uint64_t clipped = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        bool sat = false;
        codes[i] = quantize_value(values[i], params, &sat);
        clipped += sat ? 1 : 0;
    }
    if (saturations) *saturations += clipped;
    return codes;
}

std::vector<double> dequantize(std::span<const std::int32_t> codes, const QuantParams& params) {
    std::vector<double> out(codes.size());
    std::transform(codes.begin(), codes.end(), out.begin(),
                   [&](std::int32_t c) { return dequantize_value(c, params); });
    return out;
}

double rrmse(std::span<const double> reference, std::span<const double> approx) {
    if (reference.size() != approx.size()) throw std::invalid_argument("rrmse: length mismatch");
    double err = 0.0;
    double ref = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double d = reference[i] - approx[i];
        err += d * d;
        ref += reference[i] * reference[i];
    }
    if (ref == 0.0) throw std::invalid_argument("undefined relative error");
    return std::sqrt(err / ref);
}

double round_trip_rrmse(std::span<const double> values, ValueRange range, int bitwidth) {
    const QuantParams p = make_params(range, bitwidth);
    const auto codes = uniform_quantize(values, p);
    const auto back = dequantize(codes, p);
    return rrmse(values, back);
}

} // namespace redy
