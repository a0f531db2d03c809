#include "redy/report.hpp"

#include "redy/error.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace redy {

namespace {

using json = nlohmann::ordered_json;

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * v);
    return buf;
}

std::string num(double v, int digits = 3) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

json counters_json(const ActivityCounters& c) {
    return json{{"crossbar_activations", c.crossbar_activations},
                {"adc_conversions", c.adc_conversions},
                {"streamed_bits", c.streamed_bits}};
}

json summary_json(const LayerSummary& s) {
    json j;
    j["layer"] = s.layer;
    j["name"] = s.name;
    j["redy_applied"] = s.redy_applied;
    j["groups"] = s.groups;
    json b = json::object();
    for (int bits = kMaxBits; bits >= 3; --bits) b[std::to_string(bits)] = 100.0 * s.breakdown[bits];
    j["breakdown_percent"] = std::move(b);
    j["average_bits"] = s.average_bits;
    j["activity_reduction"] = s.activity_reduction;
    j["adc_reduction"] = s.adc_reduction;
    j["counters"] = counters_json(s.counters);
    j["baseline_counters"] = counters_json(s.baseline);
    j["mean_rrmse"] = s.mean_rrmse;
    j["saturations"] = s.saturations;
    return j;
}

json energy_json(const EnergyReport& e) {
    return json{{"xbar_j", e.xbar_j},       {"adc_j", e.adc_j},         {"buffer_j", e.buffer_j},
                {"redy_j", e.redy_dynamic_j}, {"dynamic_j", e.dynamic_j}, {"static_j", e.static_j},
                {"total_j", e.total_j}};
}

class Table {
public:
    explicit Table(std::vector<std::string> header) { rows_.push_back(std::move(header)); }
    void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

    std::string str() const {
        std::vector<std::size_t> width;
        for (const auto& r : rows_) {
            if (width.size() < r.size()) width.resize(r.size(), 0);
            for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
        }
        std::ostringstream o;
        for (std::size_t ri = 0; ri < rows_.size(); ++ri) {
            const auto& r = rows_[ri];
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (i == 0) {
                    o << r[i] << std::string(width[i] - r[i].size(), ' ');
                } else {
                    o << "  " << std::string(width[i] - r[i].size(), ' ') << r[i];
                }
            }
            o << '\n';
            if (ri == 0) {
                std::size_t total = 0;
                for (std::size_t w : width) total += w + 2;
                o << std::string(total - 2, '-') << '\n';
            }
        }
        return o.str();
    }

private:
    std::vector<std::vector<std::string>> rows_;
};

void add_breakdown_rows(Table& t, const std::vector<const LayerSummary*>& cols) {
    bool any = false;
    for (const auto* c : cols) any = any || c->groups > 0;
    if (!any) return;
    for (int bits = kMaxBits; bits >= 3; --bits) {
        std::vector<std::string> row{std::to_string(bits) + "-bits"};
        for (const auto* c : cols) row.push_back(pct(c->breakdown[bits]));
        t.add(std::move(row));
    }
}

} // namespace

void finish_summary(LayerSummary& s, std::uint64_t bits_sum) {
    if (s.groups > 0) {
        for (double& b : s.breakdown) b /= static_cast<double>(s.groups);
        s.average_bits = static_cast<double>(bits_sum) / static_cast<double>(s.groups);
    }
    if (s.baseline.crossbar_activations > 0)
        s.activity_reduction = 1.0 - static_cast<double>(s.counters.crossbar_activations) /
                                         static_cast<double>(s.baseline.crossbar_activations);
    if (s.baseline.adc_conversions > 0)
        s.adc_reduction = 1.0 - static_cast<double>(s.counters.adc_conversions) /
                                    static_cast<double>(s.baseline.adc_conversions);
}

nlohmann::ordered_json to_json(const Report& r) {
    json j;
    j["schema"] = "redy-report";
    j["schema_version"] = kReportSchemaVersion;
    j["model"] = r.model;
    j["inputs"] = r.inputs;
    j["seed"] = r.seed;
    j["redy"] = json{{"bins", r.bins},
                     {"subsample_ratio", r.subsample_ratio},
                     {"histogram_mode", r.histogram_mode},
                     {"thresholds", r.thresholds.p}};
    j["floorplan"] = json{{"total_arrays", r.total_arrays}, {"memory_utilization", r.memory_utilization}};
    json policies = json::array();
    for (const auto& p : r.policies) {
        json jp;
        jp["policy"] = p.policy;
        json totals = summary_json(p.total);
        totals.erase("layer");
        totals.erase("name");
        totals.erase("redy_applied");
        jp["totals"] = std::move(totals);
        jp["speedup"] = p.speedup;
        jp["bottleneck_layer"] = p.bottleneck_layer;
        jp["normalized_energy"] = p.energy.normalized;
        jp["energy_savings"] = p.energy.savings;
        jp["energy"] = energy_json(p.energy.policy);
        jp["baseline_energy"] = energy_json(p.energy.baseline);
        jp["precision_variation"] = p.precision_variation;
        jp["redy_units"] = p.redy_units;
        jp["top_class"] = p.top_class;
        json layers = json::array();
        for (const auto& l : p.layers) layers.push_back(summary_json(l));
        jp["layers"] = std::move(layers);
        policies.push_back(std::move(jp));
    }
    j["policies"] = std::move(policies);
    return j;
}

std::string to_text(const Report& r) {
    std::ostringstream o;
    o << "model: " << r.model << "  inputs: " << r.inputs << "  bins: " << r.bins
      << "  subsample: " << num(r.subsample_ratio, 2) << "  histogram: " << r.histogram_mode << "\n\n";
    for (const auto& p : r.policies) {
        o << "policy: " << p.policy << "\n";
        std::vector<std::string> header{"Numerical Precision"};
        std::vector<const LayerSummary*> cols;
        for (const auto& l : p.layers) {
            header.push_back(l.name);
            cols.push_back(&l);
        }
        header.push_back("total");
        cols.push_back(&p.total);
        Table t(header);
        add_breakdown_rows(t, cols);
        auto row = [&](const std::string& label, auto fn) {
            std::vector<std::string> rr{label};
            for (const auto* c : cols) rr.push_back(fn(*c));
            t.add(std::move(rr));
        };
        row("Average Bitwidth", [](const LayerSummary& s) { return num(s.average_bits, 2) + "-bits"; });
        row("Activity Reduction", [](const LayerSummary& s) { return pct(s.activity_reduction); });
        row("Mean RRMSE", [](const LayerSummary& s) { return pct(s.mean_rrmse); });
        row("Saturations", [](const LayerSummary& s) { return std::to_string(s.saturations); });
        o << t.str();
        o << "speedup: " << num(p.speedup) << "x  normalized energy: " << num(p.energy.normalized)
          << "  precision variation: " << pct(p.precision_variation) << "\n\n";
    }
    if (r.policies.size() > 1) {
        std::vector<std::string> header{"Numerical Precision"};
        std::vector<const LayerSummary*> cols;
        for (const auto& p : r.policies) {
            header.push_back(p.policy);
            cols.push_back(&p.total);
        }
        Table t(header);
        add_breakdown_rows(t, cols);
        auto row = [&](const std::string& label, auto fn) {
            std::vector<std::string> rr{label};
            for (const auto& p : r.policies) rr.push_back(fn(p));
            t.add(std::move(rr));
        };
        row("Average Bitwidth", [](const PolicySummary& p) { return num(p.total.average_bits, 2) + "-bits"; });
        row("Activity Reduction", [](const PolicySummary& p) { return pct(p.total.activity_reduction); });
        row("Normalized Energy", [](const PolicySummary& p) { return num(p.energy.normalized); });
        row("Speedup", [](const PolicySummary& p) { return num(p.speedup) + "x"; });
        row("Mean RRMSE", [](const PolicySummary& p) { return pct(p.total.mean_rrmse); });
        o << "comparison\n" << t.str();
    }
    return o.str();
}

void emit_report(const Report& report, const std::filesystem::path& out_dir, const std::string& stem) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error("cannot create output directory " + out_dir.string() + ": " + ec.message());
    {
        std::ofstream out(out_dir / (stem + ".json"), std::ios::trunc);
        if (!out) throw Error("cannot write " + (out_dir / (stem + ".json")).string());
        out << to_json(report).dump(2) << '\n';
        if (!out) throw Error("cannot write " + (out_dir / (stem + ".json")).string());
    }
    std::ofstream out(out_dir / (stem + ".txt"), std::ios::trunc);
    if (!out) throw Error("cannot write " + (out_dir / (stem + ".txt")).string());
    out << to_text(report);
    if (!out) throw Error("cannot write " + (out_dir / (stem + ".txt")).string());
}

} // namespace redy
