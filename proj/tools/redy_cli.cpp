// redy: calibrate, run, compare and sweep a quantized CNN on the ReRAM model.

#include "redy/accel.hpp"
#include "redy/calibration.hpp"
#include "redy/config.hpp"
#include "redy/error.hpp"
#include "redy/model_io.hpp"
#include "redy/report.hpp"
#include "redy/runner.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Options {
    std::vector<std::string> configs;
    std::string model;
    std::string inputs;
    std::string out = "redy-out";
    std::optional<std::string> policy;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> histogram_mode;
    std::optional<double> budget;
    std::vector<int> bins{2, 4, 8, 16, 32};
    std::vector<double> ratios{0.05, 0.10, 0.25, 0.50, 1.00};
    bool write_outputs = true;
};

struct Session {
    redy::RunConfig cfg;
    redy::Network net;
    std::vector<fs::path> input_paths;
    std::vector<redy::Tensor> inputs;
};

Session open_session(const Options& o) {
    Session s;
    std::vector<fs::path> paths(o.configs.begin(), o.configs.end());
    s.cfg = redy::load_config(paths);
    if (o.policy) s.cfg.run.policy = redy::parse_policy(*o.policy);
    if (o.seed) s.cfg.run.seed = *o.seed;
    if (o.threads) s.cfg.run.threads = *o.threads;
    if (o.histogram_mode) s.cfg.redy.mode = redy::parse_histogram_mode(*o.histogram_mode);
    if (o.budget) s.cfg.run.error_budget = *o.budget;
    if (!o.inputs.empty()) s.cfg.run.inputs = o.inputs;
    s.cfg.validate();
    s.net = redy::load_model(o.model);
    if (s.cfg.run.inputs.empty()) throw redy::ConfigError("no inputs: pass --inputs or set run.inputs");
    s.input_paths = redy::expand_glob(s.cfg.run.inputs);
    s.inputs = redy::load_inputs(s.input_paths);
    return s;
}

// Ranges come from a calibration patch; a MAC layer without one is a config error.
std::vector<std::optional<redy::ValueRange>> calibrated_ranges(const Session& s) {
    auto ranges = s.cfg.layer_ranges(s.net);
    for (std::size_t i = 0; i < s.net.layers.size(); ++i) {
        if (s.net.layers[i].spec.has_weights() && !ranges[i])
            throw redy::ConfigError("missing calibration: no [ranges] entry for layer '" + s.net.layers[i].spec.name +
                                    "' (run calibrate first)");
    }
    return ranges;
}

std::string model_name(const Options& o) {
    fs::path p(o.model);
    if (!p.has_filename()) p = p.parent_path();
    return p.filename().string();
}

redy::PolicyRun run_one(const Session& s, const redy::CompiledNetwork& compiled, redy::QuantPolicy policy,
                        const fs::path* outputs_dir, const redy::PolicyRun* reference = nullptr) {
    redy::ForwardOptions fo;
    fo.policy = policy;
    fo.redy = s.cfg.redy;
    fo.seed = s.cfg.run.seed;
    const auto ranges = calibrated_ranges(s);
    redy::PolicyRun run = redy::run_policy(compiled, ranges, s.inputs, fo, s.cfg.run.threads, reference);
    if (outputs_dir) {
        fs::create_directories(*outputs_dir);
        for (std::size_t i = 0; i < run.results.size(); ++i) {
            const fs::path name = s.input_paths[i].stem().string() + ".out.rdtn";
            redy::write_tensor(*outputs_dir / name, run.results[i].output);
        }
    }
    return run;
}

int cmd_calibrate(const Options& o) {
    Session s = open_session(o);
    const auto ranges = redy::calibrate_ranges(s.net, s.inputs);
    const auto cal = redy::calibrate_thresholds(s.net, ranges, s.inputs, s.cfg.redy, s.cfg.run.error_budget);
    fs::create_directories(o.out);
    const fs::path patch = fs::path(o.out) / "calibration.ini";
    std::ofstream f(patch, std::ios::binary);
    f << redy::format_calibration_patch(cal.thresholds, ranges, s.net);
    if (!f) throw redy::Error("cannot write " + patch.string());
    std::cout << "groups profiled: " << cal.groups << "\n"
              << "average bits:    " << cal.average_bits << "\n"
              << "mean RRMSE:      " << cal.mean_rrmse << "\n";
    if (!cal.feasible)
        std::cout << "warning: no threshold tuple meets the budget " << s.cfg.run.error_budget
                  << "; thresholds force 8 bits\n";
    std::cout << "wrote " << patch.string() << "\n";
    return 0;
}

int cmd_run(const Options& o, bool compare) {
    Session s = open_session(o);
    const redy::CompiledNetwork compiled(s.net, s.cfg.crossbar, s.cfg.redy.bins);
    const redy::Floorplan floorplan = redy::build_floorplan(s.net, s.cfg.crossbar, s.cfg.chip, s.cfg.redy.bins);
    std::vector<redy::PolicySummary> summaries;
    const fs::path out(o.out);
    if (compare) {
        // The random baseline reuses the ReDy run's per-layer precision multisets.
        std::optional<redy::PolicyRun> redy_run;
        for (auto p : {redy::QuantPolicy::static8, redy::QuantPolicy::redy, redy::QuantPolicy::random_baseline}) {
            const fs::path dir = out / "outputs" / redy::to_string(p);
            const redy::PolicyRun* ref = p == redy::QuantPolicy::random_baseline ? &*redy_run : nullptr;
            redy::PolicyRun run = run_one(s, compiled, p, o.write_outputs ? &dir : nullptr, ref);
            summaries.push_back(redy::summarize(run, s.net, floorplan, s.cfg));
            if (p == redy::QuantPolicy::redy) redy_run = std::move(run);
        }
    } else {
        const fs::path dir = out / "outputs";
        const redy::PolicyRun run = run_one(s, compiled, s.cfg.run.policy, o.write_outputs ? &dir : nullptr);
        summaries.push_back(redy::summarize(run, s.net, floorplan, s.cfg));
    }
    const redy::Report report =
        redy::make_report(model_name(o), s.inputs.size(), s.cfg, floorplan, std::move(summaries));
    redy::emit_report(report, out, compare ? "compare" : "report");
    std::cout << redy::to_text(report);
    return 0;
}

int cmd_sweep(const Options& o) {
    Session s = open_session(o);
    const auto ranges = calibrated_ranges(s);
    auto points = redy::sweep_bins(s.net, ranges, s.inputs, s.cfg.redy, o.bins, s.cfg.run.error_budget);
    auto sub = redy::sweep_subsample(s.net, ranges, s.inputs, s.cfg.redy, o.ratios);
    points.insert(points.end(), sub.begin(), sub.end());
    fs::create_directories(o.out);
    const fs::path json_path = fs::path(o.out) / "sweep.json";
    const fs::path text_path = fs::path(o.out) / "sweep.txt";
    std::ofstream j(json_path, std::ios::binary);
    j << redy::sweep_json(points).dump(2) << "\n";
    std::ofstream t(text_path, std::ios::binary);
    t << redy::sweep_text(points);
    if (!j || !t) throw redy::Error("cannot write sweep reports under " + o.out);
    std::cout << redy::sweep_text(points);
    return 0;
}

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.configs, "Config file; repeat to layer overrides")->check(CLI::ExistingFile);
    sub->add_option("--model", o.model, "Model directory holding manifest.json")->required();
    sub->add_option("--inputs", o.inputs, "Glob of RDTN input tensors");
    sub->add_option("--out", o.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", o.seed, "Seed for random-baseline permutations");
    sub->add_option("--threads", o.threads, "Worker threads");
    sub->add_option("--histogram-mode", o.histogram_mode, "exact|exponent")
        ->check(CLI::IsMember({"exact", "exponent"}));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ReDy ReRAM accelerator simulator"};
    app.require_subcommand(1);
    Options o;

    auto* calibrate = app.add_subcommand("calibrate", "Derive layer ranges and thresholds; write a config patch");
    add_common(calibrate, o);
    calibrate->add_option("--budget", o.budget, "Mean group RRMSE budget");

    auto* run = app.add_subcommand("run", "Run one policy and write reports and output tensors");
    add_common(run, o);
    run->add_option("--policy", o.policy, "static8|redy|random")->check(CLI::IsMember({"static8", "redy", "random"}));

    auto* compare = app.add_subcommand("compare", "Run static8, redy and random side by side");
    add_common(compare, o);

    auto* sweep = app.add_subcommand("sweep", "Decision divergence across bin counts and subsample ratios");
    add_common(sweep, o);
    sweep->add_option("--bins", o.bins, "Bin counts")->capture_default_str();
    sweep->add_option("--budget", o.budget, "Mean group RRMSE budget for per-bin-count thresholds");
    sweep->add_option("--ratios", o.ratios, "Subsample ratios")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*calibrate) return cmd_calibrate(o);
        if (*run) return cmd_run(o, false);
        if (*compare) return cmd_run(o, true);
        if (*sweep) return cmd_sweep(o);
    } catch (const redy::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const redy::ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
