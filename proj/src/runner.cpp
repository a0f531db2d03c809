#include "redy/runner.hpp"

#include "redy/calibration.hpp"
#include "redy/error.hpp"
#include "redy/model_io.hpp"

#include <glob.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace redy {

std::vector<std::filesystem::path> expand_glob(const std::string& pattern) {
    glob_t g{};
    const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
    std::vector<std::filesystem::path> out;
    if (rc == 0) {
        for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
    }
    globfree(&g);
    if (out.empty()) throw Error("no input files match '" + pattern + "'");
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Tensor> load_inputs(const std::vector<std::filesystem::path>& paths) {
    std::vector<Tensor> out;
    out.reserve(paths.size());
    for (const auto& p : paths) out.push_back(read_tensor(p));
    return out;
}

PolicyRun run_policy(const CompiledNetwork& net, const std::vector<std::optional<ValueRange>>& ranges,
                     std::span<const Tensor> inputs, const ForwardOptions& opts, int threads,
                     const PolicyRun* reference) {
    if (reference && reference->results.size() != inputs.size())
        throw Error("reference run covers a different number of inputs");
    PolicyRun run;
    run.policy = opts.policy;
    run.results.resize(inputs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < inputs.size(); i = next++) {
            try {
                ForwardOptions o = opts;
                o.seed = opts.seed ^ (0x9E3779B97F4A7C15ull * (i + 1));
                if (reference) o.reference = &reference->results[i];
                run.results[i] = forward_quantized(net, ranges, inputs[i], o);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int n = std::max(1, std::min<int>(threads, static_cast<int>(inputs.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return run;
}

int argmax(const Tensor& t) {
    if (t.empty()) return -1;
    return static_cast<int>(std::max_element(t.data().begin(), t.data().end()) - t.data().begin());
}

PolicySummary summarize(const PolicyRun& run, const Network& net, const Floorplan& floorplan, const RunConfig& cfg) {
    PolicySummary ps;
    ps.policy = to_string(run.policy);
    std::map<std::size_t, LayerSummary> by_layer;
    std::map<std::size_t, std::uint64_t> bits_by_layer;
    std::map<std::size_t, double> rrmse_sum;
    std::map<std::size_t, std::uint64_t> rrmse_n;
    std::uint64_t redy_samples = 0;
    std::uint64_t redy_decisions = 0;
    for (const auto& result : run.results) {
        ps.top_class.push_back(argmax(result.output));
        for (const auto& lr : result.layers) {
            LayerSummary& s = by_layer[lr.layer];
            s.layer = lr.layer;
            s.name = net.layers[lr.layer].spec.name;
            s.redy_applied = lr.redy_applied;
            s.groups += lr.decisions.size();
            for (const auto& d : lr.decisions) {
                s.breakdown[d.bitwidth] += 1.0;
                bits_by_layer[lr.layer] += static_cast<std::uint64_t>(d.bitwidth);
            }
            s.counters += lr.counters;
            s.baseline += lr.baseline_counters;
            s.saturations += lr.saturations;
            rrmse_sum[lr.layer] += lr.rrmse_sum;
            rrmse_n[lr.layer] += lr.rrmse_groups;
            redy_samples += lr.histogram_samples;
            redy_decisions += lr.redy_decisions;
        }
    }

    LayerSummary& total = ps.total;
    total.name = "total";
    std::uint64_t total_bits = 0;
    double total_rrmse = 0.0;
    std::uint64_t total_rrmse_n = 0;
    std::vector<double> avg_bits(net.layers.size(), 8.0);
    for (auto& [layer, s] : by_layer) {
        const std::uint64_t bits = bits_by_layer[layer];
        total.groups += s.groups;
        for (int b = 0; b <= kMaxBits; ++b) total.breakdown[b] += s.breakdown[b];
        total.counters += s.counters;
        total.baseline += s.baseline;
        total.saturations += s.saturations;
        total_bits += bits;
        total_rrmse += rrmse_sum[layer];
        total_rrmse_n += rrmse_n[layer];
        s.mean_rrmse = rrmse_n[layer] ? rrmse_sum[layer] / static_cast<double>(rrmse_n[layer]) : 0.0;
        finish_summary(s, bits);
        avg_bits[layer] = s.groups ? s.average_bits : 8.0;
        ps.layers.push_back(s);
    }
    total.mean_rrmse = total_rrmse_n ? total_rrmse / static_cast<double>(total_rrmse_n) : 0.0;
    finish_summary(total, total_bits);

    const PipelineEstimate pipe = estimate_pipeline(net, floorplan, cfg.crossbar, avg_bits, cfg.redy.bins);
    ps.speedup = pipe.speedup;
    ps.bottleneck_layer = pipe.bottleneck_layer;

    const bool uses_redy = run.policy != QuantPolicy::static8;
    ps.redy_units = uses_redy ? redy_unit_count(net, cfg.redy.bins) : 0;
    const double n_inputs = static_cast<double>(run.results.size());
    EnergyInputs policy_in;
    policy_in.counters = total.counters;
    policy_in.buffer_bytes = total.counters.streamed_bits / 8;
    policy_in.redy_samples = redy_samples;
    policy_in.redy_decisions = redy_decisions;
    policy_in.wall_cycles = pipe.bottleneck_cycles * n_inputs;
    policy_in.redy_units = ps.redy_units;
    EnergyInputs base_in;
    base_in.counters = total.baseline;
    base_in.buffer_bytes = total.baseline.streamed_bits / 8;
    base_in.wall_cycles = pipe.baseline_bottleneck_cycles * n_inputs;
    ps.energy = compare_energy(policy_in, base_in, floorplan, cfg.energy);

    // Variation between consecutive executions, over groups of ReDy layers.
    if (run.results.size() > 1) {
        double sum = 0.0;
        for (std::size_t i = 1; i < run.results.size(); ++i) {
            std::vector<PrecisionDecision> a;
            std::vector<PrecisionDecision> b;
            for (const auto& lr : run.results[i - 1].layers)
                if (lr.redy_applied) a.insert(a.end(), lr.decisions.begin(), lr.decisions.end());
            for (const auto& lr : run.results[i].layers)
                if (lr.redy_applied) b.insert(b.end(), lr.decisions.begin(), lr.decisions.end());
            sum += precision_variation(a, b);
        }
        ps.precision_variation = sum / static_cast<double>(run.results.size() - 1);
    }
    return ps;
}

Report make_report(const std::string& model, std::size_t inputs, const RunConfig& cfg, const Floorplan& floorplan,
                   std::vector<PolicySummary> policies) {
    Report r;
    r.model = model;
    r.inputs = inputs;
    r.seed = cfg.run.seed;
    r.bins = cfg.redy.bins;
    r.subsample_ratio = cfg.redy.subsample_ratio;
    r.histogram_mode = to_string(cfg.redy.mode);
    r.thresholds = cfg.redy.thresholds;
    r.total_arrays = floorplan.total_arrays;
    r.memory_utilization = floorplan.memory_utilization;
    r.policies = std::move(policies);
    return r;
}

namespace {

std::vector<PrecisionDecision> only_layers_with_depth(std::vector<PrecisionDecision> d, const Network& net,
                                                      std::size_t min_depth) {
    std::erase_if(d, [&](const PrecisionDecision& x) { return net.layers[x.id.layer].spec.C < min_depth; });
    return d;
}

double average_bits(std::span<const PrecisionDecision> d) {
    if (d.empty()) return 0.0;
    double s = 0.0;
    for (const auto& x : d) s += x.bitwidth;
    return s / static_cast<double>(d.size());
}

SweepPoint sweep_point(const Network& net, const std::vector<std::optional<ValueRange>>& ranges,
                       std::span<const Tensor> inputs, const RedyConfig& point, const RedyConfig& reference,
                       std::size_t min_depth) {
    SweepPoint sp;
    sp.bins = point.bins;
    sp.subsample_ratio = point.subsample_ratio;
    sp.thresholds = point.thresholds;
    double div = 0.0;
    double bits = 0.0;
    for (const Tensor& input : inputs) {
        const auto a = only_layers_with_depth(float_path_decisions(net, ranges, input, point), net, min_depth);
        const auto b = only_layers_with_depth(float_path_decisions(net, ranges, input, reference), net, min_depth);
        div += precision_variation(a, b);
        bits += average_bits(a);
    }
    if (!inputs.empty()) {
        sp.divergence = div / static_cast<double>(inputs.size());
        sp.average_bits = bits / static_cast<double>(inputs.size());
    }
    return sp;
}

} // namespace

std::vector<SweepPoint> sweep_bins(const Network& net, const std::vector<std::optional<ValueRange>>& ranges,
                                   std::span<const Tensor> inputs, const RedyConfig& cfg, std::span<const int> bins,
                                   double error_budget) {
    if (bins.empty()) return {};
    const int max_bins = *std::max_element(bins.begin(), bins.end());
    RedyConfig ref = cfg;
    ref.bins = max_bins;
    ref.mode = HistogramMode::exact;
    ref.subsample_ratio = 1.0;
    ref.validate();
    ref.thresholds = calibrate_thresholds(net, ranges, inputs, ref, error_budget).thresholds;
    std::vector<SweepPoint> out;
    for (int b : bins) {
        RedyConfig point = cfg;
        point.bins = b;
        point.subsample_ratio = 1.0;
        point.thresholds = PrecisionThresholds{}.rescaled(8, b);
        point.validate();
        point.thresholds = calibrate_thresholds(net, ranges, inputs, point, error_budget).thresholds;
        SweepPoint sp = sweep_point(net, ranges, inputs, point, ref, static_cast<std::size_t>(max_bins));
        sp.axis = "bins";
        out.push_back(sp);
    }
    return out;
}

std::vector<SweepPoint> sweep_subsample(const Network& net, const std::vector<std::optional<ValueRange>>& ranges,
                                        std::span<const Tensor> inputs, const RedyConfig& cfg,
                                        std::span<const double> ratios) {
    RedyConfig ref = cfg;
    ref.subsample_ratio = 1.0;
    std::vector<SweepPoint> out;
    for (double r : ratios) {
        RedyConfig point = cfg;
        point.subsample_ratio = r;
        point.validate();
        SweepPoint sp = sweep_point(net, ranges, inputs, point, ref, static_cast<std::size_t>(cfg.bins));
        sp.axis = "subsample_ratio";
        out.push_back(sp);
    }
    return out;
}

nlohmann::ordered_json sweep_json(const std::vector<SweepPoint>& points) {
    nlohmann::ordered_json j;
    j["schema"] = "redy-sweep";
    j["schema_version"] = kReportSchemaVersion;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& p : points) {
        arr.push_back({{"axis", p.axis},
                       {"bins", p.bins},
                       {"subsample_ratio", p.subsample_ratio},
                       {"divergence", p.divergence},
                       {"average_bits", p.average_bits},
                       {"thresholds", p.thresholds.p}});
    }
    j["points"] = std::move(arr);
    return j;
}

std::string sweep_text(const std::vector<SweepPoint>& points) {
    std::ostringstream o;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-16s %6s %10s %12s %14s\n", "axis", "bins", "subsample", "divergence",
                  "average bits");
    o << buf;
    for (const auto& p : points) {
        std::snprintf(buf, sizeof(buf), "%-16s %6d %10.3f %11.2f%% %14.3f\n", p.axis.c_str(), p.bins,
                      p.subsample_ratio, 100.0 * p.divergence, p.average_bits);
        o << buf;
    }
    return o.str();
}

} // namespace redy
