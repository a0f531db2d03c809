#pragma once

#include "redy/accel.hpp"
#include "redy/config.hpp"
#include "redy/report.hpp"
#include "redy/simulator.hpp"

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace redy {

/// Sorted matches of a shell glob. Throws Error when nothing matches.
std::vector<std::filesystem::path> expand_glob(const std::string& pattern);

std::vector<Tensor> load_inputs(const std::vector<std::filesystem::path>& paths);

struct PolicyRun {
    QuantPolicy policy = QuantPolicy::redy;
    std::vector<InferenceResult> results; // in input order
};

/// Runs every input through forward_quantized on up to threads workers. Input i
/// uses a seed derived from (opts.seed, i), so results do not depend on threads.
/// A random-baseline run given a ReDy reference run permutes that run's decisions.
PolicyRun run_policy(const CompiledNetwork& net, const std::vector<std::optional<ValueRange>>& ranges,
                     std::span<const Tensor> inputs, const ForwardOptions& opts, int threads,
                     const PolicyRun* reference = nullptr);

PolicySummary summarize(const PolicyRun& run, const Network& net, const Floorplan& floorplan, const RunConfig& cfg);

Report make_report(const std::string& model, std::size_t inputs, const RunConfig& cfg, const Floorplan& floorplan,
                   std::vector<PolicySummary> policies);

int argmax(const Tensor& t);

struct SweepPoint {
    std::string axis;          // "bins" or "subsample_ratio"
    int bins = 8;
    double subsample_ratio = 0.1;
    double divergence = 0.0;   // mean precision_variation against the reference decisions
    double average_bits = 0.0;
    PrecisionThresholds thresholds;
};

/// For each bin count, full-group decisions in the configured histogram mode are
/// compared with exact-mode decisions at the largest bin count. Every point, and
/// the reference, uses thresholds calibrated on inputs for error_budget at its own
/// bin count. Only layers deep enough for every bin count take part.
std::vector<SweepPoint> sweep_bins(const Network& net, const std::vector<std::optional<ValueRange>>& ranges,
                                   std::span<const Tensor> inputs, const RedyConfig& cfg, std::span<const int> bins,
                                   double error_budget);

/// For each ratio, decisions are compared with ratio 1.0 at the configured bins and mode.
std::vector<SweepPoint> sweep_subsample(const Network& net, const std::vector<std::optional<ValueRange>>& ranges,
                                        std::span<const Tensor> inputs, const RedyConfig& cfg,
                                        std::span<const double> ratios);

nlohmann::ordered_json sweep_json(const std::vector<SweepPoint>& points);
std::string sweep_text(const std::vector<SweepPoint>& points);

} // namespace redy
