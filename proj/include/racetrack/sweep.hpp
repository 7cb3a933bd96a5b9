#pragma once

// Cartesian parameter sweeps over a base racetrack config, the figure
// presets, and CSV / JSONL emission.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "racetrack/analytics.hpp"
#include "racetrack/config.hpp"
#include "racetrack/errors.hpp"
#include "racetrack/simulator.hpp"

namespace racetrack {

enum class SweepMode { Analytic, MonteCarlo, Both };

inline const char* to_string(SweepMode mode) {
    switch (mode) {
        case SweepMode::Analytic: return "analytic";
        case SweepMode::MonteCarlo: return "montecarlo";
        case SweepMode::Both: return "both";
    }
    return "?";
}

inline SweepMode parse_sweep_mode(const std::string& name) {
    if (name == "analytic") return SweepMode::Analytic;
    if (name == "montecarlo") return SweepMode::MonteCarlo;
    if (name == "both") return SweepMode::Both;
    throw UsageError("unknown sweep mode '" + name + "' (analytic|montecarlo|both)");
}

inline const std::vector<std::string>& sweep_axis_names() {
    static const std::vector<std::string> names = {"cycles_N",        "detector_eta",        "gen_prob_p",
                                                   "inner_loop_delay_ns", "sources_S", "waveguide_loss_db_ns"};
    return names;
}

struct SweepAxis {
    std::string name;
    std::vector<double> values;
};

struct SweepGrid {
    std::vector<SweepAxis> axes;
    SweepMode mode = SweepMode::Analytic;
    std::uint64_t trials = 100000;
    std::uint64_t seed = 0xC0FFEE;
    /// Replace cycles_N at every point by pump_cycles_for_target(p, target_pN).
    bool cycles_from_target = false;

    void validate() const {
        std::set<std::string> seen;
        for (const auto& axis : axes) {
            const auto& known = sweep_axis_names();
            if (std::find(known.begin(), known.end(), axis.name) == known.end()) {
                throw UsageError("unknown sweep axis '" + axis.name + "'");
            }
            if (!seen.insert(axis.name).second) throw UsageError("duplicate sweep axis '" + axis.name + "'");
            if (axis.values.empty()) throw UsageError("sweep axis '" + axis.name + "' has no values");
            for (double v : axis.values) {
                if (!std::isfinite(v)) throw UsageError("sweep axis '" + axis.name + "' has a non-finite value");
            }
        }
        if (cycles_from_target && seen.count("cycles_N")) {
            throw UsageError("cycles_N cannot be an axis when derived from the target probability");
        }
        if (mode != SweepMode::Analytic && trials < 1) throw UsageError("trials must be >= 1");
    }

    std::size_t point_count() const {
        std::size_t n = 1;
        for (const auto& axis : axes) n *= axis.values.size();
        return n;
    }

    std::vector<std::string> sorted_axis_names() const {
        std::vector<std::string> names;
        for (const auto& axis : axes) names.push_back(axis.name);
        std::sort(names.begin(), names.end());
        return names;
    }
};

/// One evaluated grid point. Cells are keyed by column name; numeric
/// columns hold doubles, assumptions/error hold text.
struct SweepRow {
    std::size_t index = 0;
    std::map<std::string, double> values;
    std::string assumptions;
    std::string error;

    bool ok() const { return error.empty(); }
    std::optional<double> get(const std::string& column) const {
        const auto it = values.find(column);
        return it == values.end() ? std::nullopt : std::optional<double>(it->second);
    }
};

/// Sorted axis names, derived columns, then output columns.
inline std::vector<std::string> sweep_columns(const SweepGrid& grid) {
    std::vector<std::string> columns = grid.sorted_axis_names();
    if (grid.cycles_from_target) columns.push_back("cycles_N");
    columns.push_back("output_prob");
    if (grid.mode == SweepMode::Both) columns.push_back("mc_output_prob");
    if (grid.mode != SweepMode::Analytic) {
        columns.push_back("ci99");
        columns.push_back("trials");
    }
    columns.push_back("t_mux_ns");
    columns.push_back("assumptions");
    columns.push_back("error");
    return columns;
}

/// Sets one named parameter on a config. Domain checks happen in validate().
inline void apply_parameter(RacetrackConfig& config, const std::string& name, double value) {
    auto as_count = [&](double v) -> std::uint64_t {
        if (!(v >= 1.0) || v != std::floor(v)) throw DomainError(name + " must be a positive integer");
        return static_cast<std::uint64_t>(v);
    };
    if (name == "inner_loop_delay_ns") {
        config.timing.inner_loop_delay_override = value;
    } else if (name == "waveguide_loss_db_ns") {
        config.loss.waveguide_loss_db_per_ns = value;
    } else if (name == "gen_prob_p") {
        config.plan.gen_prob = value;
    } else if (name == "sources_S") {
        const auto s = as_count(value);
        if (s > 1000000) throw DomainError("sources_S too large");
        config.plan.sources = static_cast<std::uint32_t>(s);
    } else if (name == "cycles_N") {
        config.plan.cycles = as_count(value);
    } else if (name == "detector_eta") {
        config.herald.efficiency = value;
    } else {
        throw UsageError("unknown parameter '" + name + "'");
    }
}

/// Evaluates one grid point; domain/config failures become an error row.
inline SweepRow evaluate_point(const SweepGrid& grid, const RacetrackConfig& base, std::size_t index) {
    SweepRow row;
    row.index = index;
    std::size_t rest = index;
    RacetrackConfig config = base;
    config.rng_seed = mix_seed(grid.seed, index);
    try {
        // last axis varies fastest
        std::vector<double> point(grid.axes.size());
        for (std::size_t a = grid.axes.size(); a-- > 0;) {
            const auto& values = grid.axes[a].values;
            point[a] = values[rest % values.size()];
            rest /= values.size();
        }
        for (std::size_t a = 0; a < grid.axes.size(); ++a) row.values[grid.axes[a].name] = point[a];
        for (std::size_t a = 0; a < grid.axes.size(); ++a) apply_parameter(config, grid.axes[a].name, point[a]);
        if (grid.cycles_from_target) {
            config.plan.cycles = std::max<std::uint64_t>(1, pump_cycles_for_target(config.plan.gen_prob,
                                                                                   config.plan.target_pN));
            row.values["cycles_N"] = static_cast<double>(config.plan.cycles);
        }
        config.validate();
        row.assumptions = assumptions_tag(config);
        if (grid.mode != SweepMode::MonteCarlo) row.values["output_prob"] = output_probability(config);
        if (grid.mode != SweepMode::Analytic) {
            SimulationOptions options;
            options.workers = 1;
            const SimulationResult mc = simulate(config, grid.trials, options);
            row.values[grid.mode == SweepMode::Both ? "mc_output_prob" : "output_prob"] = mc.output_prob;
            row.values["ci99"] = mc.ci99;
            row.values["trials"] = static_cast<double>(mc.trials);
        }
        row.values["t_mux_ns"] =
            repetition_time(config.plan.cycles, config.timing.pump_period_ns(), config.timing.switch_off);
    } catch (const DomainError& e) {
        row.error = e.what();
    } catch (const ConfigError& e) {
        row.error = e.what();
    }
    return row;
}

/// Evaluates the Cartesian product of the axes. Rows come back in point
/// order whatever the worker count; each point has its own seed.
inline std::vector<SweepRow> run_sweep(const SweepGrid& grid, const RacetrackConfig& base, unsigned workers = 0) {
    grid.validate();
    const std::size_t points = grid.point_count();
    std::vector<SweepRow> rows(points);
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(points, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < points; ++i) rows[i] = evaluate_point(grid, base, i);
        return rows;
    }
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < points; i += workers) rows[i] = evaluate_point(grid, base, i);
        });
    }
    for (auto& t : pool) t.join();
    return rows;
}

// ---------------------------------------------------------------------------
// Figure presets

/// Waveguide loss used by the fig1/fig3 presets, calibrated against the
/// reference points checked by the acceptance suite.
inline constexpr double kCalibratedLossDbPerNs = 0.006;

struct FigurePreset {
    std::string name;
    SweepGrid grid;
    RacetrackConfig base;
    std::string notes;
};

/// n log-spaced values from lo to hi, endpoints exact.
inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        values[i] = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
    }
    values.front() = lo;
    values.back() = hi;
    return values;
}

inline RacetrackConfig preset_base() {
    RacetrackConfig base;
    base.timing.detector_delay = 0.0;
    base.timing.classical_delay = 0.0;
    base.timing.switch_on = 50.0;
    base.timing.switch_off = 950.0;
    base.loss.waveguide_loss_db_per_ns = kCalibratedLossDbPerNs;
    base.herald.efficiency = 0.9;
    base.plan.target_pN = 0.999;
    return base;
}

inline FigurePreset figure_preset(const std::string& name) {
    FigurePreset preset;
    preset.name = name;
    preset.base = preset_base();
    preset.grid.mode = SweepMode::Analytic;
    if (name == "fig1") {
        preset.base.plan.sources = 1;
        preset.base.switches_per_source = 1024;
        preset.grid.cycles_from_target = true;
        preset.grid.axes = {{"gen_prob_p", log_grid(1e-4, 0.05, 16)},
                            {"inner_loop_delay_ns", log_grid(1.0, 100.0, 21)}};
        preset.notes = "S=1, N=trunc(log(1-0.999)/log(1-p)), eta=0.9 on the output photon, replace-with-latest";
    } else if (name == "fig3") {
        preset.base.plan.gen_prob = 0.05;
        preset.base.eta_placement = EtaPlacement::Herald;
        preset.base.switches_per_source = 300;
        std::vector<double> cycles;
        for (int n = 1; n <= 10; ++n) cycles.push_back(n);
        for (double n : {15, 20, 30, 40, 50, 75, 100, 150, 200, 300}) cycles.push_back(n);
        preset.grid.axes = {{"sources_S", {1, 5, 20, 50}},
                            {"inner_loop_delay_ns", {1, 5, 20, 50, 100}},
                            {"cycles_N", cycles}};
        preset.notes = "p=0.05, eta=0.9 applied at the herald, replace-with-latest";
    } else if (name == "fig7") {
        preset.base.plan.sources = 150;
        preset.base.plan.cycles = 150;
        preset.base.plan.policy = StoragePolicy::KeepFirst;
        preset.base.switches_per_source = 150;
        preset.grid.axes = {{"inner_loop_delay_ns", log_grid(1.0, 100.0, 13)},
                            {"waveguide_loss_db_ns", log_grid(0.001, 24.0, 13)},
                            {"gen_prob_p", log_grid(1e-4, 0.03, 11)}};
        preset.notes = "S=N=150, eta=0.9 on the output photon, keep-first storage";
    } else {
        throw UsageError("unknown figure preset '" + name + "' (fig1|fig3|fig7)");
    }
    return preset;
}

// ---------------------------------------------------------------------------
// Emission

enum class OutputFormat { Csv, Jsonl };

inline OutputFormat parse_format(const std::string& name) {
    if (name == "csv") return OutputFormat::Csv;
    if (name == "jsonl") return OutputFormat::Jsonl;
    throw UsageError("unknown format '" + name + "' (csv|jsonl)");
}

/// 12 significant digits.
inline std::string format_number(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

namespace detail {

inline bool is_text_column(const std::string& column) { return column == "assumptions" || column == "error"; }

inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string cell_text(const SweepRow& row, const std::string& column) {
    if (column == "assumptions") return row.assumptions;
    if (column == "error") return row.error;
    const auto v = row.get(column);
    return v ? format_number(*v) : std::string();
}

}  // namespace detail

inline void write_csv(const std::vector<std::string>& columns, const std::vector<SweepRow>& rows, std::ostream& out) {
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            out << (i ? "," : "") << detail::csv_escape(detail::cell_text(row, columns[i]));
        }
        out << '\n';
    }
}

inline void write_jsonl(const std::vector<std::string>& columns, const std::vector<SweepRow>& rows, std::ostream& out) {
    for (const auto& row : rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (const auto& column : columns) {
            if (detail::is_text_column(column)) {
                obj[column] = detail::cell_text(row, column);
            } else if (const auto v = row.get(column)) {
                obj[column] = std::stod(format_number(*v));
            } else {
                obj[column] = nullptr;
            }
        }
        out << obj.dump() << '\n';
    }
}

/// Writes rows to `path`; an empty path or "-" means `fallback` (stdout).
inline void emit(const std::vector<std::string>& columns, const std::vector<SweepRow>& rows, OutputFormat format,
                 const std::string& path, std::ostream& fallback) {
    std::ofstream file;
    std::ostream* out = &fallback;
    if (!path.empty() && path != "-") {
        file.open(path, std::ios::binary | std::ios::trunc);
        if (!file) throw IoError("cannot open '" + path + "' for writing");
        out = &file;
    }
    if (format == OutputFormat::Csv) {
        write_csv(columns, rows, *out);
    } else {
        write_jsonl(columns, rows, *out);
    }
    out->flush();
    if (!*out) throw IoError("write failed for '" + (path.empty() ? std::string("-") : path) + "'");
}

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<SweepRow> rows;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    return fields;
}

}  // namespace detail

/// Parses CSV written by write_csv back into rows.
inline CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty CSV");
    table.columns = detail::split_csv_line(line);
    std::size_t index = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != table.columns.size()) {
            throw IoError("CSV row " + std::to_string(index + 1) + " has " + std::to_string(fields.size()) +
                          " fields, expected " + std::to_string(table.columns.size()));
        }
        SweepRow row;
        row.index = index++;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const auto& column = table.columns[i];
            if (column == "assumptions") {
                row.assumptions = fields[i];
            } else if (column == "error") {
                row.error = fields[i];
            } else if (!fields[i].empty()) {
                row.values[column] = std::stod(fields[i]);
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace racetrack
