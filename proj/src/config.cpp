#include "redy/config.hpp"

#include "redy/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace redy {

namespace {

namespace pt = boost::property_tree;

// Shortest text that parses back to the same double.
std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
    }
}

long long to_int(const std::string& key, const std::string& v) {
    long long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
    return out;
}

AdcMode parse_adc_mode(const std::string& v) {
    if (v == "ideal") return AdcMode::ideal;
    if (v == "clip") return AdcMode::clip;
    if (v == "quantize") return AdcMode::quantize;
    throw ConfigError("config key 'accelerator.adc_mode': expected ideal|clip|quantize, got '" + v + "'");
}

const char* adc_mode_str(AdcMode m) {
    switch (m) {
    case AdcMode::ideal: return "ideal";
    case AdcMode::clip: return "clip";
    case AdcMode::quantize: return "quantize";
    }
    return "?";
}

ValueRange parse_range(const std::string& key, const std::string& v) {
    const auto comma = v.find(',');
    if (comma == std::string::npos) throw ConfigError("config key '" + key + "': expected 'lo, hi'");
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    ValueRange r{to_double(key, trim(v.substr(0, comma))), to_double(key, trim(v.substr(comma + 1)))};
    if (!r.valid()) throw ConfigError("config key '" + key + "': range invariant violated: lo <= hi");
    return r;
}

void apply_accelerator(RunConfig& cfg, const std::string& key, const std::string& v) {
    const std::string full = "accelerator." + key;
    auto& x = cfg.crossbar;
    auto& e = cfg.energy;
    if (key == "rows") x.rows = static_cast<int>(to_int(full, v));
    else if (key == "cols") x.cols = static_cast<int>(to_int(full, v));
    else if (key == "cell_bits") x.cell_bits = static_cast<int>(to_int(full, v));
    else if (key == "weight_bits") x.weight_bits = static_cast<int>(to_int(full, v));
    else if (key == "adc_bits") x.adc_bits = static_cast<int>(to_int(full, v));
    else if (key == "adcs_per_xbar") x.adcs_per_xbar = static_cast<int>(to_int(full, v));
    else if (key == "adc_mode") x.adc_mode = parse_adc_mode(v);
    else if (key == "apus_per_pe") cfg.chip.apus_per_pe = static_cast<int>(to_int(full, v));
    else if (key == "pes_per_tile") cfg.chip.pes_per_tile = static_cast<int>(to_int(full, v));
    else if (key == "tiles") cfg.chip.tiles = static_cast<int>(to_int(full, v));
    else if (key == "frequency_mhz") e.frequency_hz = to_double(full, v) * 1e6;
    else if (key == "e_xbar_pj") e.e_xbar_event = to_double(full, v) * 1e-12;
    else if (key == "e_adc_pj") e.e_adc_conversion = to_double(full, v) * 1e-12;
    else if (key == "e_buffer_pj_per_byte") e.e_buffer_per_byte = to_double(full, v) * 1e-12;
    else if (key == "array_static_uw") e.array_static_power = to_double(full, v) * 1e-6;
    else if (key == "chip_static_mw") e.chip_static_power = to_double(full, v) * 1e-3;
    else if (key == "redy_area_um2") e.redy_unit_area_um2 = to_double(full, v);
    else if (key == "redy_latency_ns") e.redy_unit_latency_s = to_double(full, v) * 1e-9;
    else if (key == "redy_static_uw") e.redy_unit_static_power = to_double(full, v) * 1e-6;
    else if (key == "redy_dynamic_uw") e.redy_unit_dynamic_power = to_double(full, v) * 1e-6;
    else throw ConfigError("unknown config key '" + full + "'");
}

void apply_redy(RunConfig& cfg, const std::string& key, const std::string& v) {
    const std::string full = "redy." + key;
    auto& r = cfg.redy;
    if (key == "bins") r.bins = static_cast<int>(to_int(full, v));
    else if (key == "subsample_ratio") r.subsample_ratio = to_double(full, v);
    else if (key == "histogram_mode") r.mode = parse_histogram_mode(v);
    else if (key.size() == 2 && key[0] == 'p' && key[1] >= '1' && key[1] <= '5') r.thresholds.p[key[1] - '1'] = to_double(full, v);
    else throw ConfigError("unknown config key '" + full + "'");
}

void apply_run(RunConfig& cfg, const std::string& key, const std::string& v) {
    const std::string full = "run." + key;
    auto& r = cfg.run;
    if (key == "policy") r.policy = parse_policy(v);
    else if (key == "inputs") r.inputs = v;
    else if (key == "seed") r.seed = static_cast<std::uint64_t>(to_int(full, v));
    else if (key == "threads") r.threads = static_cast<int>(to_int(full, v));
    else if (key == "error_budget") r.error_budget = to_double(full, v);
    else throw ConfigError("unknown config key '" + full + "'");
}

} // namespace

void RunConfig::validate() const {
    crossbar.validate();
    chip.validate();
    energy.validate();
    redy.validate();
    if (run.threads < 1) throw ConfigError("run invariant violated: threads >= 1");
    if (!(run.error_budget >= 0.0)) throw ConfigError("run invariant violated: error_budget >= 0");
}

std::vector<std::optional<ValueRange>> RunConfig::layer_ranges(const Network& net) const {
    std::vector<std::optional<ValueRange>> out(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const auto it = ranges.find(net.layers[i].spec.name);
        if (it != ranges.end()) out[i] = it->second;
    }
    return out;
}

RunConfig parse_config(const std::string& text, RunConfig base) {
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError("config key '" + section + "' must be inside a section");
        for (const auto& [key, node] : body) {
            const std::string value = node.get_value<std::string>();
            if (section == "accelerator") apply_accelerator(base, key, value);
            else if (section == "redy") apply_redy(base, key, value);
            else if (section == "run") apply_run(base, key, value);
            else if (section == "ranges") base.ranges[key] = parse_range("ranges." + key, value);
            else throw ConfigError("unknown config section [" + section + "]");
        }
    }
    base.validate();
    return base;
}

RunConfig load_config(const std::vector<std::filesystem::path>& paths) {
    RunConfig cfg;
    for (const auto& p : paths) {
        std::ifstream in(p);
        if (!in) throw ConfigError("cannot open config file " + p.string());
        std::stringstream ss;
        ss << in.rdbuf();
        cfg = parse_config(ss.str(), cfg);
    }
    cfg.validate();
    return cfg;
}

std::string format_config(const RunConfig& cfg) {
    std::ostringstream o;
    const auto& x = cfg.crossbar;
    const auto& e = cfg.energy;
    o << "[accelerator]\n"
      << "rows = " << x.rows << "\ncols = " << x.cols << "\ncell_bits = " << x.cell_bits
      << "\nweight_bits = " << x.weight_bits << "\nadc_bits = " << x.adc_bits
      << "\nadcs_per_xbar = " << x.adcs_per_xbar << "\nadc_mode = " << adc_mode_str(x.adc_mode)
      << "\napus_per_pe = " << cfg.chip.apus_per_pe << "\npes_per_tile = " << cfg.chip.pes_per_tile
      << "\ntiles = " << cfg.chip.tiles << "\nfrequency_mhz = " << fmt_double(e.frequency_hz / 1e6)
      << "\ne_xbar_pj = " << fmt_double(e.e_xbar_event * 1e12)
      << "\ne_adc_pj = " << fmt_double(e.e_adc_conversion * 1e12)
      << "\ne_buffer_pj_per_byte = " << fmt_double(e.e_buffer_per_byte * 1e12)
      << "\narray_static_uw = " << fmt_double(e.array_static_power * 1e6)
      << "\nchip_static_mw = " << fmt_double(e.chip_static_power * 1e3)
      << "\nredy_area_um2 = " << fmt_double(e.redy_unit_area_um2)
      << "\nredy_latency_ns = " << fmt_double(e.redy_unit_latency_s * 1e9)
      << "\nredy_static_uw = " << fmt_double(e.redy_unit_static_power * 1e6)
      << "\nredy_dynamic_uw = " << fmt_double(e.redy_unit_dynamic_power * 1e6) << "\n\n";
    const auto& r = cfg.redy;
    o << "[redy]\nbins = " << r.bins << "\nsubsample_ratio = " << fmt_double(r.subsample_ratio)
      << "\nhistogram_mode = " << to_string(r.mode) << "\n";
    for (int i = 0; i < 5; ++i) o << "p" << i + 1 << " = " << fmt_double(r.thresholds.p[i]) << "\n";
    o << "\n[run]\npolicy = " << to_string(cfg.run.policy) << "\n";
    if (!cfg.run.inputs.empty()) o << "inputs = " << cfg.run.inputs << "\n";
    o << "seed = " << cfg.run.seed << "\nthreads = " << cfg.run.threads
      << "\nerror_budget = " << fmt_double(cfg.run.error_budget) << "\n";
    if (!cfg.ranges.empty()) {
        o << "\n[ranges]\n";
        for (const auto& [name, range] : cfg.ranges) o << name << " = " << fmt_double(range.lo) << ", " << fmt_double(range.hi) << "\n";
    }
    return o.str();
}

std::string format_calibration_patch(const PrecisionThresholds& thresholds,
                                     const std::vector<std::optional<ValueRange>>& ranges, const Network& net) {
    std::ostringstream o;
    o << "[redy]\n";
    for (int i = 0; i < 5; ++i) o << "p" << i + 1 << " = " << fmt_double(thresholds.p[i]) << "\n";
    o << "\n[ranges]\n";
    for (std::size_t i = 0; i < net.layers.size() && i < ranges.size(); ++i) {
        if (!ranges[i]) continue;
        o << net.layers[i].spec.name << " = " << fmt_double(ranges[i]->lo) << ", " << fmt_double(ranges[i]->hi) << "\n";
    }
    return o.str();
}

} // namespace redy
