#pragma once

// JSON configuration documents. A document is a flat object whose keys
// mirror RacetrackConfig, plus optional "trials", "seed" and a "sweep"
// object. CLI flags use the same key names and override file values.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "racetrack/config.hpp"
#include "racetrack/errors.hpp"
#include "racetrack/sweep.hpp"

namespace racetrack {

struct RunSettings {
    RacetrackConfig config;
    std::uint64_t trials = 100000;
    std::optional<SweepGrid> sweep;
};

inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "sources_S",          "cycles_N",           "gen_prob_p",         "target_pN",
        "switch_budget_q",    "storage_policy",     "switches_per_source_m", "detector_eta",
        "dark_count_prob",    "eta_placement",      "waveguide_loss_db_ns", "switch_pass_loss_db",
        "output_coupling",    "detector_delay_ns",  "classical_delay_ns", "switch_on_ns",
        "switch_off_ns",      "loop_traversal_ns",  "pump_period_ns",     "inner_loop_delay_ns",
        "dead_time_cycles",   "generation_mode",    "zeta",               "coupling_c",
        "pump_power_mw",      "n_max",              "seed",               "trials"};
    return keys;
}

namespace detail {

inline double json_number(const std::string& key, const nlohmann::json& value) {
    if (!value.is_number()) throw ConfigError("'" + key + "' must be a number");
    return value.get<double>();
}

inline std::uint64_t json_count(const std::string& key, const nlohmann::json& value) {
    if (value.is_number_unsigned()) return value.get<std::uint64_t>();
    if (value.is_string()) {
        try {
            return std::stoull(value.get<std::string>(), nullptr, 0);  // accepts 0x...
        } catch (const std::exception&) {
        }
    }
    throw ConfigError("'" + key + "' must be a nonnegative integer");
}

inline std::string json_text(const std::string& key, const nlohmann::json& value) {
    if (!value.is_string()) throw ConfigError("'" + key + "' must be a string");
    return value.get<std::string>();
}

}  // namespace detail

inline void apply_setting(RunSettings& settings, const std::string& key, const nlohmann::json& value) {
    RacetrackConfig& c = settings.config;
    using detail::json_count;
    using detail::json_number;
    using detail::json_text;
    if (key == "sources_S") {
        c.plan.sources = static_cast<std::uint32_t>(json_count(key, value));
    } else if (key == "cycles_N") {
        c.plan.cycles = json_count(key, value);
    } else if (key == "gen_prob_p") {
        c.plan.gen_prob = json_number(key, value);
    } else if (key == "target_pN") {
        c.plan.target_pN = json_number(key, value);
    } else if (key == "switch_budget_q") {
        c.plan.switch_budget_q = json_number(key, value);
    } else if (key == "storage_policy") {
        const auto v = json_text(key, value);
        if (v == "replace-latest") {
            c.plan.policy = StoragePolicy::ReplaceWithLatest;
        } else if (v == "keep-first") {
            c.plan.policy = StoragePolicy::KeepFirst;
        } else {
            throw ConfigError("storage_policy must be replace-latest or keep-first");
        }
    } else if (key == "switches_per_source_m") {
        c.switches_per_source = json_count(key, value);
    } else if (key == "detector_eta") {
        c.herald.efficiency = json_number(key, value);
    } else if (key == "dark_count_prob") {
        c.herald.dark_count_prob = json_number(key, value);
    } else if (key == "eta_placement") {
        const auto v = json_text(key, value);
        if (v == "output") {
            c.eta_placement = EtaPlacement::Output;
        } else if (v == "herald") {
            c.eta_placement = EtaPlacement::Herald;
        } else {
            throw ConfigError("eta_placement must be output or herald");
        }
    } else if (key == "waveguide_loss_db_ns") {
        c.loss.waveguide_loss_db_per_ns = json_number(key, value);
    } else if (key == "switch_pass_loss_db") {
        c.loss.switch_pass_loss_db = json_number(key, value);
    } else if (key == "output_coupling") {
        c.loss.output_coupling = json_number(key, value);
    } else if (key == "detector_delay_ns") {
        c.timing.detector_delay = json_number(key, value);
    } else if (key == "classical_delay_ns") {
        c.timing.classical_delay = json_number(key, value);
    } else if (key == "switch_on_ns") {
        c.timing.switch_on = json_number(key, value);
    } else if (key == "switch_off_ns") {
        c.timing.switch_off = json_number(key, value);
    } else if (key == "loop_traversal_ns") {
        c.timing.loop_traversal = json_number(key, value);
    } else if (key == "pump_period_ns") {
        c.timing.pump_period = json_number(key, value);
    } else if (key == "inner_loop_delay_ns") {
        c.timing.inner_loop_delay_override = json_number(key, value);
    } else if (key == "dead_time_cycles") {
        c.dead_time_cycles = json_count(key, value);
    } else if (key == "generation_mode") {
        const auto v = json_text(key, value);
        if (v == "direct") {
            c.generation_mode = GenerationMode::DirectP;
        } else if (v == "spdc") {
            c.generation_mode = GenerationMode::SpdcDerived;
        } else {
            throw ConfigError("generation_mode must be direct or spdc");
        }
    } else if (key == "zeta") {
        c.spdc.zeta = json_number(key, value);
    } else if (key == "coupling_c") {
        c.spdc.coupling_c = json_number(key, value);
    } else if (key == "pump_power_mw") {
        c.spdc.pump_power_mw = json_number(key, value);
    } else if (key == "n_max") {
        c.spdc.n_max = static_cast<int>(json_count(key, value));
    } else if (key == "seed") {
        c.rng_seed = json_count(key, value);
    } else if (key == "trials") {
        settings.trials = json_count(key, value);
    } else {
        throw ConfigError("unknown configuration key '" + key + "'");
    }
    // Pump parameters determine zeta when both are known.
    if ((key == "coupling_c" || key == "pump_power_mw") && c.spdc.coupling_c && c.spdc.pump_power_mw) {
        c.spdc.zeta = zeta_from_pump(*c.spdc.coupling_c, *c.spdc.pump_power_mw);
    }
}

/// A flag value from the command line: JSON literal if it parses, else a string.
inline void apply_setting_text(RunSettings& settings, const std::string& key, const std::string& text) {
    nlohmann::json value;
    try {
        value = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
        value = text;
    }
    apply_setting(settings, key, value);
}

inline SweepGrid parse_sweep(const nlohmann::json& j, const RunSettings& settings) {
    if (!j.is_object()) throw ConfigError("'sweep' must be an object");
    SweepGrid grid;
    grid.trials = settings.trials;
    grid.seed = settings.config.rng_seed;
    for (const auto& [key, value] : j.items()) {
        if (key == "mode") {
            grid.mode = parse_sweep_mode(detail::json_text(key, value));
        } else if (key == "cycles_from_target") {
            if (!value.is_boolean()) throw ConfigError("'cycles_from_target' must be a boolean");
            grid.cycles_from_target = value.get<bool>();
        } else if (key == "axes") {
            if (!value.is_array()) throw ConfigError("'axes' must be an array of {name, values}");
            for (const auto& axis : value) {
                SweepAxis a;
                a.name = detail::json_text("name", axis.at("name"));
                for (const auto& v : axis.at("values")) a.values.push_back(detail::json_number(a.name, v));
                grid.axes.push_back(std::move(a));
            }
        } else {
            throw ConfigError("unknown sweep key '" + key + "'");
        }
    }
    return grid;
}

inline RunSettings parse_settings(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("configuration document must be a JSON object");
    RunSettings settings;
    std::optional<nlohmann::json> sweep;
    for (const auto& [key, value] : doc.items()) {
        if (key == "sweep") {
            sweep = value;
        } else {
            apply_setting(settings, key, value);
        }
    }
    if (sweep) settings.sweep = parse_sweep(*sweep, settings);
    return settings;
}

inline RunSettings load_settings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read configuration '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("configuration '" + path + "': " + e.what());
    }
    return parse_settings(doc);
}

/// Inverse of parse_settings for the scalar keys.
inline nlohmann::ordered_json to_json(const RacetrackConfig& c) {
    nlohmann::ordered_json j;
    j["sources_S"] = c.plan.sources;
    j["cycles_N"] = c.plan.cycles;
    j["gen_prob_p"] = c.plan.gen_prob;
    j["target_pN"] = c.plan.target_pN;
    j["switch_budget_q"] = c.plan.switch_budget_q;
    j["storage_policy"] = to_string(c.plan.policy);
    j["switches_per_source_m"] = c.switches_per_source;
    j["detector_eta"] = c.herald.efficiency;
    j["dark_count_prob"] = c.herald.dark_count_prob;
    j["eta_placement"] = to_string(c.eta_placement);
    j["waveguide_loss_db_ns"] = c.loss.waveguide_loss_db_per_ns;
    j["switch_pass_loss_db"] = c.loss.switch_pass_loss_db;
    j["output_coupling"] = c.loss.output_coupling;
    j["detector_delay_ns"] = c.timing.detector_delay;
    j["classical_delay_ns"] = c.timing.classical_delay;
    j["switch_on_ns"] = c.timing.switch_on;
    j["switch_off_ns"] = c.timing.switch_off;
    j["loop_traversal_ns"] = c.timing.loop_traversal;
    if (c.timing.pump_period) j["pump_period_ns"] = *c.timing.pump_period;
    if (c.timing.inner_loop_delay_override) j["inner_loop_delay_ns"] = *c.timing.inner_loop_delay_override;
    j["dead_time_cycles"] = c.dead_time_cycles;
    j["generation_mode"] = to_string(c.generation_mode);
    j["zeta"] = c.spdc.zeta;
    if (c.spdc.coupling_c) j["coupling_c"] = *c.spdc.coupling_c;
    if (c.spdc.pump_power_mw) j["pump_power_mw"] = *c.spdc.pump_power_mw;
    j["n_max"] = c.spdc.n_max;
    j["seed"] = c.rng_seed;
    return j;
}

}  // namespace racetrack
