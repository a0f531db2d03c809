#include "redy/crossbar.hpp"
#include "redy/error.hpp"

#include <doctest.h>

#include <random>
#include <stdexcept>
#include <vector>

using namespace redy;

namespace {

CrossbarConfig two_bit_weights() {
    CrossbarConfig cfg;
    cfg.weight_bits = 2;
    cfg.cell_bits = 2;
    return cfg;
}

std::vector<std::int64_t> matvec(const std::vector<std::int32_t>& w, std::size_t depth, std::size_t kernels,
                                 const std::vector<std::int32_t>& x) {
    std::vector<std::int64_t> out(kernels, 0);
    for (std::size_t d = 0; d < depth; ++d)
        for (std::size_t k = 0; k < kernels; ++k) out[k] += std::int64_t{x[d]} * w[d * kernels + k];
    return out;
}

} // namespace

TEST_CASE("weight slices are base-4 digits, most significant first") {
    const CrossbarConfig cfg;
    CHECK(weight_slices(0b10110011, cfg) == std::vector<std::uint8_t>{2, 3, 0, 3});
    CHECK(weight_slices(0, cfg) == std::vector<std::uint8_t>{0, 0, 0, 0});
    const std::vector<std::int32_t> zero(4, 0);
    const auto m = program_weights(zero, 1, 4, false, cfg);
    for (auto c : m.arrays[0].cells) CHECK(c == 0);
}

TEST_CASE("hand-traced bit-serial product") {
    const auto cfg = two_bit_weights();
    const std::vector<std::int32_t> w{1, 2, 3, 1};
    const auto m = program_weights(w, 2, 2, false, cfg);
    ActivityCounters c;
    const std::vector<std::int32_t> x{3, 1};
    CHECK(mvm_bit_serial(m.arrays[0], cfg, x, 2, false, c) == std::vector<std::int64_t>{6, 7});
    CHECK(c.crossbar_activations == 2);
    CHECK(c.adc_conversions == 2 * 128);
    CHECK(c.streamed_bits == 2 * 2);
    // Single planes reproduce the trace: MSB plane [1,0] and LSB plane [1,1].
    ActivityCounters scratch;
    CHECK(mvm_bit_serial(m.arrays[0], cfg, std::vector<std::int32_t>{1, 0}, 1, false, scratch) ==
          std::vector<std::int64_t>{1, 2});
    CHECK(mvm_bit_serial(m.arrays[0], cfg, std::vector<std::int32_t>{1, 1}, 1, false, scratch) ==
          std::vector<std::int64_t>{4, 3});
}

TEST_CASE("zero inputs still stream every plane") {
    const CrossbarConfig cfg;
    const std::vector<std::int32_t> w(16 * 4, 7);
    const auto m = program_weights(w, 16, 4, false, cfg);
    ActivityCounters c;
    const auto out = mvm(m, std::vector<std::int32_t>(16, 0), 8, false, c);
    CHECK(out == std::vector<std::int64_t>(4, 0));
    CHECK(c.crossbar_activations == 8);
    CHECK(c.streamed_bits == 8 * 16);
    CHECK(c == mvm_cost(m, 8));
}

TEST_CASE("random 128-row product matches an integer oracle") {
    std::mt19937_64 rng(42);
    const CrossbarConfig cfg;
    for (bool sw : {false, true}) {
        std::vector<std::int32_t> w(128 * 40);
        for (auto& v : w) v = sw ? static_cast<int>(rng() % 256) - 128 : static_cast<int>(rng() % 256);
        std::vector<std::int32_t> x(128);
        for (auto& v : x) v = static_cast<int>(rng() % 256);
        const auto m = program_weights(w, 128, 40, sw, cfg);
        CHECK(m.array_count() == 2);
        ActivityCounters c;
        CHECK(mvm(m, x, 8, false, c) == matvec(w, 128, 40, x));
        CHECK(c == mvm_cost(m, 8));
        CHECK(c.adc_conversions == c.crossbar_activations * 128);
    }
}

TEST_CASE("array splitting") {
    const CrossbarConfig cfg;
    const auto m = program_weights(std::vector<std::int32_t>(192 * 8, 1), 192, 8, false, cfg);
    CHECK(m.array_count() == 2);
    CHECK(m.array(0, 0).rows_used == 128);
    CHECK(m.array(1, 0).rows_used == 64);
    const auto m2 = program_weights(std::vector<std::int32_t>(192 * 48, 1), 192, 48, false, cfg);
    CHECK(m2.row_segments == 2);
    CHECK(m2.col_segments == 2);
    CHECK(m2.array(0, 1).kernels == 16);
    CHECK(m2.array(0, 1).cols_used == 64);
}

TEST_CASE("out-of-range codes are rejected") {
    const CrossbarConfig cfg;
    CHECK_THROWS_AS(program_weights(std::vector<std::int32_t>{256}, 1, 1, false, cfg), std::out_of_range);
    CHECK_THROWS_AS(program_weights(std::vector<std::int32_t>{128}, 1, 1, true, cfg), std::out_of_range);
    CHECK_NOTHROW(program_weights(std::vector<std::int32_t>{-128}, 1, 1, true, cfg));
    const auto m = program_weights(std::vector<std::int32_t>{1, 1}, 2, 1, false, cfg);
    ActivityCounters c;
    CHECK_THROWS_AS(mvm(m, std::vector<std::int32_t>{16, 0}, 4, false, c), std::out_of_range);
    CHECK_THROWS_AS(mvm(m, std::vector<std::int32_t>{1}, 4, false, c), std::invalid_argument);
}

TEST_CASE("config validation") {
    CrossbarConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.weight_bits = 7;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.rows = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.adcs_per_xbar = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("ADC sampling modes") {
    CrossbarConfig cfg;
    CHECK(adc_sample(384, cfg) == 384);
    cfg.adc_mode = AdcMode::clip;
    CHECK(adc_sample(40, cfg) == 31);
    CHECK(adc_sample(12, cfg) == 12);
    cfg.adc_mode = AdcMode::quantize;
    // level round(192*31/384) = 16, reconstructed 16*384/31 = 198.19
    CHECK(adc_sample(192, cfg) == 198);
    CHECK(adc_sample(0, cfg) == 0);
    CHECK(adc_sample(384, cfg) == 384);
}

TEST_CASE("partial-sum rescaling") {
    CHECK(rescale_partial_sum(123, 8) == 123);
    CHECK(rescale_partial_sum(5, 6) == 20);
    CHECK(rescale_partial_sum(-3, 3) == -96);
    CHECK_THROWS_AS(rescale_partial_sum(1, 9), std::invalid_argument);
    CHECK_THROWS_AS(rescale_partial_sum(1, 0), std::invalid_argument);
}

TEST_CASE("property: product is linear in bit planes") {
    std::mt19937_64 rng(8);
    const CrossbarConfig cfg;
    for (int it = 0; it < 50; ++it) {
        const std::size_t depth = 1 + rng() % 128;
        const std::size_t kernels = 1 + rng() % 40;
        std::vector<std::int32_t> w(depth * kernels);
        for (auto& v : w) v = static_cast<int>(rng() % 256) - 128;
        const auto m = program_weights(w, depth, kernels, true, cfg);
        const int bits = 1 + static_cast<int>(rng() % 8);
        std::vector<std::int32_t> x(depth);
        for (auto& v : x) v = static_cast<int>(rng() % (1u << bits));
        ActivityCounters c;
        const auto full = mvm(m, x, bits, false, c);
        std::vector<std::int64_t> sum(kernels, 0);
        for (int t = 0; t < bits; ++t) {
            std::vector<std::int32_t> plane(depth);
            for (std::size_t i = 0; i < depth; ++i) plane[i] = (x[i] >> t) & 1;
            ActivityCounters pc;
            const auto part = mvm(m, plane, 1, false, pc);
            for (std::size_t k = 0; k < kernels; ++k) sum[k] += part[k] << t;
        }
        CHECK(sum == full);
    }
}

TEST_CASE("property: mixed precision truncation matches the shifted oracle") {
    // A value quantized at n bits and shifted by 8-n equals the 8-bit product of the
    // shifted codes, so rescaling is exact.
    std::mt19937_64 rng(9);
    const CrossbarConfig cfg;
    std::vector<std::int32_t> w(64 * 8);
    for (auto& v : w) v = static_cast<int>(rng() % 256) - 128;
    const auto m = program_weights(w, 64, 8, true, cfg);
    for (int n = 3; n <= 8; ++n) {
        std::vector<std::int32_t> x(64), shifted(64);
        for (std::size_t i = 0; i < 64; ++i) {
            x[i] = static_cast<int>(rng() % (1u << n));
            shifted[i] = x[i] << (8 - n);
        }
        ActivityCounters a, b;
        auto low = mvm(m, x, n, false, a);
        for (auto& v : low) v = rescale_partial_sum(v, n);
        CHECK(low == mvm(m, shifted, 8, false, b));
        CHECK(a.crossbar_activations * 8 == b.crossbar_activations * static_cast<std::uint64_t>(n));
    }
}
