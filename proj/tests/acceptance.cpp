// Acceptance suite: one PASS/FAIL line per criterion. Exit status 0 only if all pass.

#include "redy/accel.hpp"
#include "redy/calibration.hpp"
#include "redy/crossbar.hpp"
#include "redy/fixture.hpp"
#include "redy/quant.hpp"
#include "redy/redy_engine.hpp"
#include "redy/report.hpp"
#include "redy/runner.hpp"
#include "redy/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace redy;

namespace {

// Tolerances and sizes, fixed here so a run cannot loosen them.
constexpr int kBitSerialInstances = 1200;
constexpr double kBitSerialSeconds = 10.0;
constexpr int kDuGroups = 3000;
constexpr double kDuSlack = 1e-12;
constexpr double kRatioEqualityTol = 1e-12;
constexpr double kRatioAnchor = 0.722;         // paired counts quoted for one layer
constexpr double kRatioAnchorTol = 0.001;
constexpr int kExceptionInputs = 50;
constexpr double kGrowthFactor = 10.0;
constexpr double kSpeedupAnchor = 8.0 / 6.0;
constexpr double kSpeedupTol = 0.001;
constexpr double kEnergyTol = 1e-9;
constexpr int kFidelityInputs = 200;
constexpr int kCalibrationInputs = 64;
constexpr double kErrorBudget = 0.02;
constexpr double kTopClassAgreement = 0.95;
constexpr std::size_t kMinDistinctClasses = 5; // guards against a constant classifier
constexpr double kFidelitySeconds = 60.0;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            if (pass) detail << "failed: " << what << "; ";
            pass = false;
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Weight-bit and cell-bit pairs with 1 to 4 slices.
struct CellLayout {
    int weight_bits;
    int cell_bits;
};
constexpr CellLayout kLayouts[] = {{1, 1}, {2, 1}, {2, 2}, {3, 1}, {3, 3}, {4, 1}, {4, 2}, {4, 4}, {5, 5},
                                   {6, 2}, {6, 3}, {6, 6}, {7, 7}, {8, 2}, {8, 4}, {8, 8}};

Outcome c1_bit_serial() {
    Outcome o;
    std::mt19937_64 rng(101);
    const auto t0 = std::chrono::steady_clock::now();
    auto uni = [&](std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
    };
    int signed_cases = 0;
    for (int it = 0; it < kBitSerialInstances && o.pass; ++it) {
        const CellLayout lay = kLayouts[uni(0, std::size(kLayouts) - 1)];
        CrossbarConfig cfg;
        cfg.weight_bits = lay.weight_bits;
        cfg.cell_bits = lay.cell_bits;
        const std::size_t rows = static_cast<std::size_t>(uni(1, 128));
        const std::size_t kernels = static_cast<std::size_t>(uni(1, cfg.kernels_per_array()));
        const bool sw = uni(0, 1) == 1;
        const bool si = uni(0, 1) == 1;
        const int ib = static_cast<int>(uni(1, 8));
        signed_cases += sw || si;

        std::vector<std::int32_t> w(rows * kernels);
        const std::int64_t wlo = sw ? -(std::int64_t{1} << (cfg.weight_bits - 1)) : 0;
        const std::int64_t whi = sw ? (std::int64_t{1} << (cfg.weight_bits - 1)) - 1 : (std::int64_t{1} << cfg.weight_bits) - 1;
        for (auto& v : w) v = static_cast<std::int32_t>(uni(wlo, whi));
        std::vector<std::int32_t> x(rows);
        const std::int64_t xlo = si ? -(std::int64_t{1} << (ib - 1)) : 0;
        const std::int64_t xhi = si ? (std::int64_t{1} << (ib - 1)) - 1 : (std::int64_t{1} << ib) - 1;
        for (auto& v : x) v = static_cast<std::int32_t>(uni(xlo, xhi));

        const ProgrammedMatrix m = program_weights(w, rows, kernels, sw, cfg);
        ActivityCounters c;
        const auto raw = mvm_bit_serial(m.array(0, 0), cfg, x, ib, si, c);
        const auto full = mvm(m, x, ib, si, c);
        for (std::size_t k = 0; k < kernels; ++k) {
            std::int64_t stored = 0;
            std::int64_t dot = 0;
            for (std::size_t r = 0; r < rows; ++r) {
                const std::int64_t wv = w[r * kernels + k];
                stored += std::int64_t{x[r]} * (wv + m.weight_offset());
                dot += std::int64_t{x[r]} * wv;
            }
            o.require(raw[k] == stored, "raw array product differs from the integer oracle");
            o.require(full[k] == dot, "corrected dot product differs from the integer oracle");
        }
    }
    const double secs = seconds_since(t0);
    o.require(secs < kBitSerialSeconds, "runtime limit");
    o.detail << kBitSerialInstances << " instances (" << signed_cases << " signed), " << secs << " s";
    return o;
}

Outcome c2_du_law() {
    Outcome o;
    std::mt19937_64 rng(202);
    const int bin_choices[] = {2, 3, 4, 5, 8, 16, 32};
    for (int it = 0; it < kDuGroups && o.pass; ++it) {
        const int b = bin_choices[rng() % std::size(bin_choices)];
        const ValueRange range{-1.0 - static_cast<double>(rng() % 5), 1.0 + static_cast<double>(rng() % 7)};
        const auto cfg = HistogramConfig::for_range(range, b, it % 3 == 0 ? 0.1 : 1.0);
        std::vector<double> g(1 + rng() % 400);
        std::normal_distribution<double> nd(0.0, 0.05 + static_cast<double>(rng() % 100) / 40.0);
        for (auto& v : g) v = nd(rng);
        const GroupStats st = compute_histogram(g, cfg, it % 2 ? HistogramMode::exponent : HistogramMode::exact);
        const double du = deviation_from_uniform(st);
        // Oracle: mean absolute deviation of the histogram from N/b.
        double sum = 0.0;
        for (auto h : st.hist) sum += std::abs(static_cast<double>(h) - static_cast<double>(st.sampled_count) / b);
        const double du_oracle = sum / st.sampled_count;
        o.require(std::abs(du - du_oracle) < 1e-12, "DU differs from the histogram oracle");
        o.require(du >= 0.0 && du <= 2.0 * (b - 1) / b + kDuSlack, "DU outside [0, 2(b-1)/b]");
    }
    for (int b : {2, 4, 8, 16, 32}) {
        const ValueRange range{0.0, 1.0};
        const auto cfg = HistogramConfig::for_range(range, b, 1.0);
        std::vector<double> flat;
        for (int i = 0; i < b; ++i)
            for (int rep = 0; rep < 5; ++rep) flat.push_back((i + 0.5) / b);
        o.require(deviation_from_uniform(compute_histogram(flat, cfg, HistogramMode::exact)) == 0.0,
                  "uniform histogram gives DU != 0");
        const std::vector<double> spike(40, 0.3);
        const double du = deviation_from_uniform(compute_histogram(spike, cfg, HistogramMode::exact));
        o.require(du == 2.0 * (b - 1) / b, "single-bin histogram gives DU != 2(b-1)/b");
        if (b == 8) o.require(du == 1.75, "single-bin DU at 8 bins != 1.75");
    }
    o.detail << kDuGroups << " random groups; uniform and single-bin cases exact";
    return o;
}

double reduction(std::uint64_t x, std::uint64_t base) {
    return 1.0 - static_cast<double>(x) / static_cast<double>(base);
}

Outcome c3_ratio_equality() {
    Outcome o;
    std::mt19937_64 rng(303);
    CrossbarConfig cfg;
    // Anchor workload: 100 groups on one channel-wise matrix, 78 at 6 bits and 22 at 5 bits.
    const std::size_t depth = 64;
    const std::size_t kernels = 48;
    std::vector<std::int32_t> w(depth * kernels);
    for (auto& v : w) v = static_cast<std::int32_t>(rng() % 256) - 128;
    const ProgrammedMatrix m = program_weights(w, depth, kernels, true, cfg);
    ActivityCounters redy_c;
    ActivityCounters base_c;
    double bit_sum = 0.0;
    for (int g = 0; g < 100; ++g) {
        const int bits = g < 78 ? 6 : 5;
        bit_sum += bits;
        std::vector<std::int32_t> x(depth);
        for (auto& v : x) v = static_cast<std::int32_t>(rng() % (1u << bits));
        mvm(m, x, bits, false, redy_c);
        base_c += mvm_cost(m, 8);
    }
    const double act = reduction(redy_c.crossbar_activations, base_c.crossbar_activations);
    const double adc = reduction(redy_c.adc_conversions, base_c.adc_conversions);
    const double kept = 1.0 - act;
    o.require(std::abs(bit_sum / 100.0 - 5.78) < 1e-12, "anchor workload average");
    o.require(std::abs(act - adc) <= kRatioEqualityTol, "anchor ADC and activation reductions differ");
    o.require(std::abs(kept - kRatioAnchor) <= kRatioAnchorTol, "kept activity ratio off the 0.722 anchor");
    o.require(std::abs(kept - 9.03e8 / 1.25e9) <= kRatioAnchorTol && std::abs(kept - 7.22e9 / 1.00e10) <= kRatioAnchorTol,
              "kept activity ratio off the quoted paired counts");

    // Any workload: random matrices, random bit mixes, and a full network run.
    for (int it = 0; it < 200 && o.pass; ++it) {
        const std::size_t d = 1 + rng() % 300;
        const std::size_t k = 1 + rng() % 70;
        std::vector<std::int32_t> ww(d * k);
        for (auto& v : ww) v = static_cast<std::int32_t>(rng() % 256) - 128;
        const ProgrammedMatrix mm = program_weights(ww, d, k, true, cfg);
        ActivityCounters rc;
        ActivityCounters bc;
        const int groups = 1 + static_cast<int>(rng() % 20);
        for (int g = 0; g < groups; ++g) {
            const int bits = 3 + static_cast<int>(rng() % 6);
            rc += mvm_cost(mm, bits);
            bc += mvm_cost(mm, 8);
        }
        o.require(std::abs(reduction(rc.crossbar_activations, bc.crossbar_activations) -
                           reduction(rc.adc_conversions, bc.adc_conversions)) <= kRatioEqualityTol,
                  "random workload reductions differ");
    }
    const Network net = make_synthetic_network(11, true);
    const auto inputs = make_synthetic_inputs(net, 8, 12);
    const auto ranges = calibrate_ranges(net, inputs);
    const CompiledNetwork compiled(net, cfg, 8);
    ForwardOptions fo;
    const auto run = run_policy(compiled, ranges, inputs, fo, 1);
    ActivityCounters rc;
    ActivityCounters bc;
    for (const auto& r : run.results) {
        rc += r.counters();
        bc += r.baseline_counters();
    }
    const double net_act = reduction(rc.crossbar_activations, bc.crossbar_activations);
    o.require(std::abs(net_act - reduction(rc.adc_conversions, bc.adc_conversions)) <= kRatioEqualityTol,
              "network reductions differ");
    o.detail << "anchor kept ratio " << kept << " (reduction " << 100.0 * act << "%), network reduction "
             << 100.0 * net_act << "%";
    return o;
}

Outcome c4_exception_path() {
    Outcome o;
    std::mt19937_64 rng(404);
    // Thresholds that would send nearly every eligible group to 3 bits.
    RedyConfig rc;
    rc.thresholds.p = {1.74, 1.73, 1.72, 1.71, 1.70};
    std::size_t shallow_groups = 0;
    std::size_t deep_below8 = 0;
    for (int it = 0; it < kExceptionInputs && o.pass; ++it) {
        Network net = make_synthetic_network(500 + it, it % 2 == 0);
        // Random first-layer depth below the bin count.
        const std::size_t c = 1 + rng() % 7;
        Layer& first = net.layers[0];
        first.spec.C = c;
        std::vector<double> wv(3 * 3 * c * first.spec.K);
        std::normal_distribution<double> nd(0.0, 0.3);
        for (auto& v : wv) v = nd(rng);
        first.weights = Tensor({3, 3, c, first.spec.K}, std::move(wv));
        net.input[2] = c;
        const auto inputs = make_synthetic_inputs(net, 1, 900 + it);
        const auto ranges = calibrate_ranges(net, inputs);
        const CompiledNetwork compiled(net, CrossbarConfig{}, rc.bins);
        ForwardOptions fo;
        fo.redy = rc;
        for (auto policy : {QuantPolicy::redy, QuantPolicy::random_baseline}) {
            fo.policy = policy;
            const auto res = forward_quantized(compiled, ranges, inputs[0], fo);
            for (const auto& lr : res.layers) {
                const bool shallow = net.layers[lr.layer].spec.C < static_cast<std::size_t>(rc.bins);
                for (const auto& d : lr.decisions) {
                    if (shallow) {
                        ++shallow_groups;
                        o.require(d.bitwidth == 8, "shallow group below 8 bits");
                    } else if (d.bitwidth < 8) {
                        ++deep_below8;
                    }
                }
            }
        }
    }
    for (int it = 0; it < 10000; ++it) {
        const double du = std::uniform_real_distribution<double>(0.0, 1.75)(rng);
        const int depth = 1 + static_cast<int>(rng() % 7);
        o.require(decide_precision(du, depth, rc.thresholds, 8) == 8, "decoder ignores depth < bins");
    }
    o.require(deep_below8 > 0, "control: eligible layers never went below 8 bits");
    o.detail << shallow_groups << " shallow groups over " << kExceptionInputs << " inputs, all 8-bit; "
             << deep_below8 << " eligible groups below 8 bits";
    return o;
}

// RRMSE oracle with the quantizer written out from its definition.
double oracle_rrmse(const std::vector<double>& v, double lo, double hi, int n) {
    const double s = std::ldexp(1.0, n) / (hi - lo);
    const double z = std::round(lo * s);
    const double qmax = std::ldexp(1.0, n) - 1.0;
    double err = 0.0;
    double ref = 0.0;
    for (double x : v) {
        const double code = std::clamp(std::round(x * s) - z, 0.0, qmax);
        const double back = (code + z) / s;
        err += (back - x) * (back - x);
        ref += x * x;
    }
    return std::sqrt(err / ref);
}

Outcome c5_distribution_sensitivity() {
    Outcome o;
    std::mt19937_64 rng(505);
    const ValueRange range{0.0, 1.0};
    std::vector<double> congested(4096);
    std::vector<double> flat(4096);
    std::normal_distribution<double> nd(0.0, 0.08);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (auto& v : congested) v = std::min(1.0, std::abs(nd(rng)));
    for (auto& v : flat) v = ud(rng);
    const double c8 = round_trip_rrmse(congested, range, 8);
    const double c4 = round_trip_rrmse(congested, range, 4);
    const double f8 = round_trip_rrmse(flat, range, 8);
    const double f4 = round_trip_rrmse(flat, range, 4);
    o.require(std::abs(c8 - oracle_rrmse(congested, 0, 1, 8)) < 1e-12 && std::abs(f4 - oracle_rrmse(flat, 0, 1, 4)) < 1e-12,
              "library RRMSE differs from oracle");
    o.require(f8 < c8, "flat group 8-bit RRMSE not below congested");
    o.require(c4 / c8 > kGrowthFactor, "congested 4/8-bit growth <= 10x");
    o.require(f4 / f8 > kGrowthFactor, "flat 4/8-bit growth <= 10x");
    // DU ranks the two groups the same way.
    const auto cfg = HistogramConfig::for_range(range, 8, 1.0);
    const double du_c = deviation_from_uniform(compute_histogram(congested, cfg, HistogramMode::exact));
    const double du_f = deviation_from_uniform(compute_histogram(flat, cfg, HistogramMode::exact));
    o.require(du_f < du_c, "DU of the flat group not below the congested group");
    char buf[200];
    std::snprintf(buf, sizeof(buf), "RRMSE 8-bit congested %.2f%% flat %.2f%%; growth %.1fx and %.1fx", 100 * c8,
                  100 * f8, c4 / c8, f4 / f8);
    o.detail << buf;
    return o;
}

LayerSpec conv_spec(const char* name, std::size_t r, std::size_t c, std::size_t k, std::size_t pad) {
    LayerSpec s;
    s.name = name;
    s.kind = LayerKind::conv;
    s.R = r;
    s.S = r;
    s.C = c;
    s.K = k;
    s.padding = pad;
    s.activation = Activation::relu;
    return s;
}

Layer zero_layer(const LayerSpec& s) {
    Layer l;
    l.spec = s;
    l.weights = Tensor({s.R, s.S, s.C, s.K});
    return l;
}

Outcome c6_speedup() {
    Outcome o;
    const CrossbarConfig xbar;
    const ChipConfig chip;
    // One ReDy layer, bottleneck by construction, averaging 6 bits.
    Network single;
    single.input = {8, 8, 32};
    single.layers.push_back(zero_layer(conv_spec("conv", 3, 32, 32, 1)));
    const Floorplan fp1 = build_floorplan(single, xbar, chip, 8);
    const std::vector<double> six{6.0};
    const double s1 = estimate_pipeline(single, fp1, xbar, six, 8).speedup;
    o.require(std::abs(s1 - kSpeedupAnchor) <= kSpeedupTol, "6-bit bottleneck speedup");

    // First layer (depth 3) dominates; the ReDy layer behind it drops to 3 bits.
    Network two;
    two.input = {32, 32, 3};
    two.layers.push_back(zero_layer(conv_spec("conv1", 3, 3, 16, 1)));
    two.layers.push_back(zero_layer(conv_spec("conv2", 1, 16, 16, 0)));
    const Floorplan fp2 = build_floorplan(two, xbar, chip, 8);
    const std::vector<double> bits{8.0, 3.0};
    const PipelineEstimate est = estimate_pipeline(two, fp2, xbar, bits, 8);
    o.require(est.bottleneck_layer == 0, "first layer is not the bottleneck");
    o.require(est.speedup == 1.0, "excluded bottleneck speedup != 1");

    // Shipped synthetic network: first layer is the bottleneck as well.
    const Network net = make_synthetic_network(7);
    const Floorplan fp3 = build_floorplan(net, xbar, chip, 8);
    const std::vector<double> low(net.layers.size(), 3.0);
    const double s3 = estimate_pipeline(net, fp3, xbar, low, 8).speedup;
    o.require(s3 == 1.0, "synthetic network speedup != 1");
    o.detail << "6-bit bottleneck " << s1 << "x; excluded bottleneck " << est.speedup << "x; synthetic net " << s3 << "x";
    return o;
}

struct CalibratedFixture {
    Network net;
    std::vector<Tensor> calibration;
    std::vector<Tensor> eval;
    std::vector<std::optional<ValueRange>> ranges;
    RedyConfig redy;
};

CalibratedFixture calibrated_fixture() {
    CalibratedFixture f;
    f.net = make_synthetic_network(7);
    f.calibration = make_synthetic_inputs(f.net, kCalibrationInputs, 8);
    f.eval = make_synthetic_inputs(f.net, kFidelityInputs, 9);
    f.ranges = calibrate_ranges(f.net, f.calibration);
    f.redy.thresholds = calibrate_thresholds(f.net, f.ranges, f.calibration, f.redy, kErrorBudget).thresholds;
    return f;
}

Outcome c7_energy(const CalibratedFixture& f) {
    Outcome o;
    RunConfig cfg;
    cfg.redy = f.redy;
    const CompiledNetwork compiled(f.net, cfg.crossbar, cfg.redy.bins);
    const Floorplan fp = build_floorplan(f.net, cfg.crossbar, cfg.chip, cfg.redy.bins);
    ForwardOptions fo;
    fo.redy = cfg.redy;
    const auto run = run_policy(compiled, f.ranges, f.eval, fo, 4);

    RunConfig bare = cfg;
    bare.energy.array_static_power = 0.0;
    bare.energy.chip_static_power = 0.0;
    bare.energy.redy_unit_static_power = 0.0;
    bare.energy.redy_unit_dynamic_power = 0.0;
    bare.energy.e_buffer_per_byte = 0.0;
    const PolicySummary degenerate = summarize(run, f.net, fp, bare);
    const double activity = degenerate.total.activity_reduction;
    o.require(std::abs(degenerate.energy.normalized - (1.0 - activity)) <= kEnergyTol,
              "degenerate normalized energy != 1 - activity reduction");

    const PolicySummary full = summarize(run, f.net, fp, cfg);
    o.require(full.energy.savings > 0.0 && full.energy.savings < activity, "default savings not in (0, reduction)");
    o.detail << "activity reduction " << 100.0 * activity << "%, degenerate normalized "
             << degenerate.energy.normalized << ", default savings " << 100.0 * full.energy.savings << "%";
    return o;
}

// Sup-norm error bound of the static 8-bit path against the float reference for one input.
double static8_bound(const Network& net, const std::vector<std::optional<ValueRange>>& ranges, const Tensor& input) {
    const auto float_in = layer_inputs_float(net, input);
    double e = 0.0;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const Layer& l = net.layers[i];
        const LayerSpec& spec = l.spec;
        if (!spec.has_weights()) continue; // pooling and ReLU do not expand sup-norm error
        const ValueRange r = *ranges[i];
        const double s = 256.0 / (r.hi - r.lo);
        double excess = spec.padding > 0 ? std::max({0.0, r.lo, -r.hi}) : 0.0;
        double maxabs = 0.0;
        for (double v : float_in[i].data()) {
            excess = std::max({excess, r.lo - v, v - r.hi});
            maxabs = std::max(maxabs, std::abs(v));
        }
        const double a = e + excess + 1.5 / s;
        double wmax = 0.0;
        for (double w : l.weights.data()) wmax = std::max(wmax, std::abs(w));
        const double ws = 127.0 / wmax;
        double colsum = 0.0;
        for (std::size_t k = 0; k < spec.K; ++k) {
            double sum = 0.0;
            for (std::size_t j = k; j < l.weights.size(); j += spec.K)
                sum += std::abs(static_cast<double>(round_half_away(l.weights[j] * ws))) / ws;
            colsum = std::max(colsum, sum);
        }
        const double taps = static_cast<double>(spec.R * spec.S * spec.C);
        e = colsum * a + (0.5 / ws) * taps * maxabs;
    }
    return e;
}

int argmax_of(const Tensor& t) {
    return static_cast<int>(std::max_element(t.data().begin(), t.data().end()) - t.data().begin());
}

Outcome c8_fidelity(const CalibratedFixture& f) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const CompiledNetwork compiled(f.net, CrossbarConfig{}, f.redy.bins);
    ForwardOptions fo;
    fo.redy = f.redy;
    fo.policy = QuantPolicy::static8;
    const auto s8 = run_policy(compiled, f.ranges, f.eval, fo, 4);
    fo.policy = QuantPolicy::redy;
    const auto rd = run_policy(compiled, f.ranges, f.eval, fo, 4);
    double worst = 0.0;
    int agree = 0;
    std::set<int> classes;
    double bits = 0.0;
    std::size_t groups = 0;
    for (std::size_t i = 0; i < f.eval.size(); ++i) {
        const Tensor ref = forward_float(f.net, f.eval[i]).back();
        const double bound = static8_bound(f.net, f.ranges, f.eval[i]);
        const Tensor& got = s8.results[i].output;
        for (std::size_t j = 0; j < ref.size(); ++j) {
            const double err = std::abs(got[j] - ref[j]);
            worst = std::max(worst, err / bound);
            o.require(err <= bound + 1e-9 * (1.0 + std::abs(ref[j])), "static8 element outside the analytic bound");
        }
        agree += argmax_of(rd.results[i].output) == argmax_of(got);
        classes.insert(argmax_of(got));
        for (const auto& lr : rd.results[i].layers)
            if (lr.redy_applied)
                for (const auto& d : lr.decisions) {
                    bits += d.bitwidth;
                    ++groups;
                }
    }
    const double agreement = static_cast<double>(agree) / static_cast<double>(f.eval.size());
    const double secs = seconds_since(t0);
    o.require(agreement >= kTopClassAgreement, "top-class agreement below 95%");
    o.require(classes.size() >= kMinDistinctClasses, "static8 predictions nearly constant");
    o.require(groups > 0 && bits / static_cast<double>(groups) < 8.0, "ReDy layers never left 8 bits");
    o.require(secs < kFidelitySeconds, "runtime limit");
    char buf[240];
    std::snprintf(buf, sizeof(buf),
                  "worst error %.1f%% of bound; top-class agreement %.1f%% over %d inputs (%zu classes); ReDy-layer "
                  "average %.2f bits; %.1f s",
                  100.0 * worst, 100.0 * agreement, kFidelityInputs, classes.size(), bits / static_cast<double>(groups), secs);
    o.detail << buf;
    return o;
}

std::map<int, std::vector<int>> layer_multisets(const InferenceResult& r) {
    std::map<int, std::vector<int>> out;
    for (const auto& lr : r.layers)
        for (const auto& d : lr.decisions) out[d.id.layer].push_back(d.bitwidth);
    for (auto& [_, v] : out) std::sort(v.begin(), v.end());
    return out;
}

Outcome c9_determinism(const CalibratedFixture& f) {
    Outcome o;
    RunConfig cfg;
    cfg.redy = f.redy;
    cfg.run.seed = 42;
    const std::span<const Tensor> inputs(f.eval.data(), 24);
    const CompiledNetwork compiled(f.net, cfg.crossbar, cfg.redy.bins);
    const Floorplan fp = build_floorplan(f.net, cfg.crossbar, cfg.chip, cfg.redy.bins);
    auto report_text = [&](int threads, PolicyRun* redy_out, PolicyRun* random_out) {
        ForwardOptions fo;
        fo.redy = cfg.redy;
        fo.seed = cfg.run.seed;
        std::vector<PolicySummary> ps;
        fo.policy = QuantPolicy::static8;
        ps.push_back(summarize(run_policy(compiled, f.ranges, inputs, fo, threads), f.net, fp, cfg));
        fo.policy = QuantPolicy::redy;
        PolicyRun redy = run_policy(compiled, f.ranges, inputs, fo, threads);
        ps.push_back(summarize(redy, f.net, fp, cfg));
        fo.policy = QuantPolicy::random_baseline;
        PolicyRun random = run_policy(compiled, f.ranges, inputs, fo, threads, &redy);
        ps.push_back(summarize(random, f.net, fp, cfg));
        if (redy_out) *redy_out = std::move(redy);
        if (random_out) *random_out = std::move(random);
        const Report rep = make_report("synthetic", inputs.size(), cfg, fp, std::move(ps));
        return to_json(rep).dump(2) + to_text(rep);
    };
    PolicyRun redy;
    PolicyRun random;
    const std::string a = report_text(1, &redy, &random);
    const std::string b = report_text(1, nullptr, nullptr);
    const std::string c = report_text(4, nullptr, nullptr);
    o.require(a == b, "repeated reports differ");
    o.require(a == c, "report depends on thread count");

    std::size_t moved = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        o.require(layer_multisets(redy.results[i]) == layer_multisets(random.results[i]),
                  "random baseline changed a per-layer precision multiset");
        const auto dr = redy.results[i].decisions();
        const auto dn = random.results[i].decisions();
        for (std::size_t g = 0; g < dr.size(); ++g) moved += dr[g].bitwidth != dn[g].bitwidth;
    }
    // Self-permutation path: multisets preserved for many seeds.
    const auto decisions = redy.results[0].decisions();
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        InferenceResult wrapped;
        LayerRun lr;
        lr.decisions = random_precision_baseline(decisions, seed);
        wrapped.layers.push_back(lr);
        InferenceResult orig;
        LayerRun lo;
        lo.decisions = decisions;
        orig.layers.push_back(lo);
        o.require(layer_multisets(wrapped) == layer_multisets(orig), "random_precision_baseline changed a multiset");
    }
    o.require(moved > 0, "random baseline never moved a bitwidth");
    o.detail << "report " << a.size() << " bytes identical across runs and 1/4 threads; " << moved
             << " groups reassigned with multisets preserved";
    return o;
}

Outcome c10_precision_variation(const CalibratedFixture& f) {
    Outcome o;
    auto decisions = [&](const Tensor& in) {
        auto d = float_path_decisions(f.net, f.ranges, in, f.redy);
        return d;
    };
    const auto a = decisions(f.eval[0]);
    const auto b = decisions(f.eval[1]);
    o.require(precision_variation(a, a) == 0.0, "variation of a run with itself != 0");
    const double v = precision_variation(a, b);
    o.require(v > 0.0, "distinct inputs give zero variation");
    // The same holds through the fixed-point path.
    const CompiledNetwork compiled(f.net, CrossbarConfig{}, f.redy.bins);
    ForwardOptions fo;
    fo.redy = f.redy;
    const auto r0 = forward_quantized(compiled, f.ranges, f.eval[0], fo).decisions();
    const auto r1 = forward_quantized(compiled, f.ranges, f.eval[1], fo).decisions();
    o.require(precision_variation(r0, r0) == 0.0, "fixed-point self variation != 0");
    o.require(precision_variation(r0, r1) > 0.0, "fixed-point distinct-input variation is zero");
    o.detail << "variation between two inputs " << 100.0 * v << "% (float path), "
             << 100.0 * precision_variation(r0, r1) << "% (fixed-point path)";
    return o;
}

} // namespace

int main() {
    int failed = 0;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        std::printf("[%s] C%-2d %-34s %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.str().c_str());
        std::fflush(stdout);
        failed += !o.pass;
    };
    report(1, "bit-serial crossbar oracle", c1_bit_serial);
    report(2, "DU law", c2_du_law);
    report(3, "reduction-ratio equality", c3_ratio_equality);
    report(4, "shallow-group exception path", c4_exception_path);
    report(5, "distribution sensitivity", c5_distribution_sensitivity);
    report(6, "speedup anchors", c6_speedup);
    const CalibratedFixture fixture = calibrated_fixture();
    report(7, "energy degeneracy", [&] { return c7_energy(fixture); });
    report(8, "end-to-end fixed-point fidelity", [&] { return c8_fidelity(fixture); });
    report(9, "determinism and random baseline", [&] { return c9_determinism(fixture); });
    report(10, "precision variation", [&] { return c10_precision_variation(fixture); });
    std::printf("%d of 10 criteria passed\n", 10 - failed);
    return failed == 0 ? 0 : 1;
}
