#pragma once

#include "redy/accel.hpp"
#include "redy/crossbar.hpp"
#include "redy/simulator.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace redy {

struct RunSection {
    QuantPolicy policy = QuantPolicy::redy;
    std::string inputs;            // glob
    std::uint64_t seed = 1;
    int threads = 1;
    double error_budget = 0.02;    // calibrate: mean group RRMSE budget
};

/// Everything a CLI run needs. Loaded from INI text with sections
/// [accelerator], [redy], [run] and, after calibration, [ranges].
struct RunConfig {
    CrossbarConfig crossbar;
    ChipConfig chip;
    EnergyModel energy;
    RedyConfig redy;
    RunSection run;
    std::map<std::string, ValueRange> ranges; // layer name -> input range

    /// Throws ConfigError naming the first violated invariant.
    void validate() const;

    /// Ranges ordered by layer index for the given network.
    std::vector<std::optional<ValueRange>> layer_ranges(const Network& net) const;
};

/// Parses INI text on top of base. Unknown sections or keys throw ConfigError.
RunConfig parse_config(const std::string& text, RunConfig base = {});

/// Loads files in order; later files override earlier ones.
RunConfig load_config(const std::vector<std::filesystem::path>& paths);

/// Full config as INI text (every key, deterministic order).
std::string format_config(const RunConfig& cfg);

/// Calibration patch: [redy] thresholds plus [ranges].
std::string format_calibration_patch(const PrecisionThresholds& thresholds,
                                     const std::vector<std::optional<ValueRange>>& ranges, const Network& net);

} // namespace redy
