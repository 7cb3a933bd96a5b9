// racetrack: analytic evaluation, Monte Carlo simulation, parameter sweeps
// and figure-data presets for the racetrack multiplexed photon source.
//
// Exit codes: 0 success, 1 usage error, 2 configuration error, 3 I/O error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "racetrack/racetrack.hpp"

namespace {

using namespace racetrack;

struct GlobalOptions {
    std::string config_path;
    std::string out;
    std::string format = "csv";
    unsigned workers = 0;
    std::map<std::string, std::string> overrides;
};

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("bad number '" + item + "' in " + what);
        }
    }
    if (values.empty()) throw UsageError(what + " needs at least one value");
    return values;
}

RunSettings resolve_settings(const GlobalOptions& g) {
    RunSettings settings = g.config_path.empty() ? RunSettings{} : load_settings(g.config_path);
    for (const auto& [key, text] : g.overrides) apply_setting_text(settings, key, text);
    if (settings.sweep) {
        settings.sweep->trials = settings.trials;
        settings.sweep->seed = settings.config.rng_seed;
    }
    return settings;
}

void write_json(const nlohmann::ordered_json& j, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed for '" + path + "'");
}

int run_analytic(const GlobalOptions& g) {
    const RunSettings s = resolve_settings(g);
    const RacetrackConfig& c = s.config;
    const OutputModel model = output_model(c);
    nlohmann::ordered_json j;
    j["output_prob"] = model.probability();
    j["cycle_success"] = model.cycle_success;
    j["loop_survival"] = model.loop_survival;
    j["photon_given_herald"] = model.photon_given_herald;
    j["output_factor"] = model.output_factor;
    j["cycles_N"] = model.cycles;
    j["inner_loop_delay_ns"] = c.timing.inner_loop_delay();
    j["cycle_time_ns"] = c.timing.cycle_time();
    j["t_mux_ns"] = repetition_time(c.plan.cycles, c.timing.pump_period_ns(), c.timing.switch_off);
    const SourceStatistics src = source_statistics(c);
    if (src.herald_prob > 0.0 && src.herald_prob < 1.0) {
        j["pump_cycles_for_target"] = pump_cycles_for_target(src.herald_prob, c.plan.target_pN);
    }
    j["required_switches_m"] = required_switches(c.plan.switch_budget_q, c.plan.cycles, src.herald_prob);
    if (c.generation_mode == GenerationMode::SpdcDerived) {
        const PairDistribution dist = pair_distribution(c.spdc);
        j["herald_click_prob"] = herald_click_probability(dist, c.herald);
        j["heralded_single_purity"] = heralded_single_purity(dist, c.herald);
    }
    j["assumptions"] = model.assumptions;
    write_json(j, g.out);
    return 0;
}

int run_simulate(const GlobalOptions& g, const std::string& event_log, std::size_t log_trials) {
    const RunSettings s = resolve_settings(g);
    SimulationOptions options;
    options.workers = g.workers;
    if (!event_log.empty()) options.log_trials = std::max<std::size_t>(log_trials, 1);
    const SimulationResult r = simulate(s.config, s.trials, options);
    std::size_t violations = 0;
    if (!event_log.empty()) {
        std::ofstream out(event_log, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + event_log + "' for writing");
        for (const auto& log : r.logs) {
            write_jsonl(log, out);
            violations += validate_schedule(log).size();
        }
        if (!out) throw IoError("write failed for '" + event_log + "'");
    }
    nlohmann::ordered_json j;
    j["output_prob"] = r.output_prob;
    j["ci99"] = r.ci99;
    j["trials"] = r.trials;
    j["successes"] = r.successes;
    j["analytic_output_prob"] = output_probability(s.config);
    j["discarded_photons"] = r.discarded_photons;
    j["exhausted_runs"] = r.exhausted_runs;
    j["t_mux_effective_ns"] = r.t_mux_effective;
    j["switch_usage"] = r.switch_usage;
    if (!event_log.empty()) j["schedule_violations"] = violations;
    j["assumptions"] = assumptions_tag(s.config);
    write_json(j, g.out);
    return 0;
}

int run_sweep_command(const GlobalOptions& g, const std::vector<std::string>& axis_specs, const std::string& mode,
                      bool cycles_from_target) {
    RunSettings s = resolve_settings(g);
    SweepGrid grid = s.sweep.value_or(SweepGrid{});
    grid.trials = s.trials;
    grid.seed = s.config.rng_seed;
    if (!mode.empty()) grid.mode = parse_sweep_mode(mode);
    if (cycles_from_target) grid.cycles_from_target = true;
    for (const auto& spec : axis_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) throw UsageError("--axis expects name=v1,v2,...");
        const std::string name = spec.substr(0, eq);
        const auto values = parse_list(spec.substr(eq + 1), "--axis " + name);
        auto it = std::find_if(grid.axes.begin(), grid.axes.end(), [&](const SweepAxis& a) { return a.name == name; });
        if (it != grid.axes.end()) {
            it->values = values;
        } else {
            grid.axes.push_back({name, values});
        }
    }
    if (grid.axes.empty()) throw UsageError("sweep needs at least one axis (--axis or a 'sweep' section)");
    const auto rows = run_sweep(grid, s.config, g.workers);
    emit(sweep_columns(grid), rows, parse_format(g.format), g.out, std::cout);
    return 0;
}

int run_switches(const GlobalOptions& g, const std::string& p_list, const std::string& n_list, double q_flag) {
    const RunSettings s = resolve_settings(g);
    const double q = q_flag > 0.0 ? q_flag : s.config.plan.switch_budget_q;
    const auto ps = p_list.empty() ? std::vector<double>{s.config.plan.gen_prob} : parse_list(p_list, "--p");
    const auto ns = n_list.empty() ? std::vector<double>{static_cast<double>(s.config.plan.cycles)}
                                   : parse_list(n_list, "--N");
    const std::vector<std::string> columns = {"cycles_N", "gen_prob_p", "switch_budget_q", "required_switches_m",
                                              "cdf_at_m"};
    std::vector<SweepRow> rows;
    for (double nd : ns) {
        if (!(nd >= 1.0) || nd != std::floor(nd)) throw DomainError("--N values must be positive integers");
        const auto n = static_cast<std::uint64_t>(nd);
        for (double p : ps) {
            SweepRow row;
            row.index = rows.size();
            const std::uint64_t m = required_switches(q, n, p);
            row.values = {{"cycles_N", nd},
                          {"gen_prob_p", p},
                          {"switch_budget_q", q},
                          {"required_switches_m", static_cast<double>(m)},
                          {"cdf_at_m", binomial_cdf(m, n, p)}};
            rows.push_back(std::move(row));
        }
    }
    emit(columns, rows, parse_format(g.format), g.out, std::cout);
    return 0;
}

int run_figures(const GlobalOptions& g, const std::string& name, const std::string& mode, std::uint64_t trials) {
    FigurePreset preset = figure_preset(name);
    RunSettings s;
    s.config = preset.base;
    for (const auto& [key, text] : g.overrides) {
        if (key == "trials") continue;
        apply_setting_text(s, key, text);
    }
    if (g.overrides.count("seed")) preset.grid.seed = s.config.rng_seed;
    if (!mode.empty()) preset.grid.mode = parse_sweep_mode(mode);
    if (trials > 0) preset.grid.trials = trials;
    const auto rows = run_sweep(preset.grid, s.config, g.workers);
    emit(sweep_columns(preset.grid), rows, parse_format(g.format), g.out, std::cout);
    return 0;
}

int validate_log_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read event log '" + path + "'");
    std::size_t total = 0;
    for (const auto& log : read_jsonl(in)) {
        for (const auto& v : validate_schedule(log)) {
            std::cout << "trial " << log.trial << " cycle " << v.cycle << " source " << v.source << " slot "
                      << v.slot << ": " << to_string(v.kind) << " (" << v.message << ")\n";
            ++total;
        }
    }
    std::cout << total << " violation(s)\n";
    return total == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Racetrack multiplexed single-photon source: analytics, Monte Carlo and sweeps"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--config", g.config_path, "JSON configuration document");
    app.add_option("--out", g.out, "Output file (default stdout)");
    app.add_option("--format", g.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
    app.add_option("--workers", g.workers, "Worker threads (0 = all cores)");
    for (const auto& key : config_keys()) {
        app.add_option_function<std::string>(
            "--" + key, [&g, key](const std::string& v) { g.overrides[key] = v; },
            "Override configuration key " + key);
    }

    auto* analytic = app.add_subcommand("analytic", "Closed-form output probability and design numbers");

    std::string event_log;
    std::size_t log_trials = 1;
    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo estimate with 99% confidence interval");
    simulate_cmd->add_option("--event-log", event_log, "Write per-cycle JSONL event logs here");
    simulate_cmd->add_option("--log-trials", log_trials, "Number of trials to log");

    std::vector<std::string> axis_specs;
    std::string sweep_mode;
    bool cycles_from_target = false;
    auto* sweep_cmd = app.add_subcommand("sweep", "Cartesian parameter sweep");
    sweep_cmd->add_option("--axis", axis_specs, "name=v1,v2,... (repeatable)");
    sweep_cmd->add_option("--mode", sweep_mode, "analytic, montecarlo or both");
    sweep_cmd->add_flag("--cycles-from-target", cycles_from_target, "Derive N from gen_prob_p and target_pN");

    std::string p_list;
    std::string n_list;
    double q_flag = 0.0;
    auto* switches_cmd = app.add_subcommand("switches", "Minimum switches per source (inverse binomial CDF)");
    switches_cmd->add_option("--p", p_list, "Comma-separated generation probabilities");
    switches_cmd->add_option("--N", n_list, "Comma-separated pump-cycle counts");
    switches_cmd->add_option("--q", q_flag, "Probability of never running out (default switch_budget_q)");

    std::string figure_name;
    std::string figure_mode;
    std::uint64_t figure_trials = 0;
    auto* figures_cmd = app.add_subcommand("figures", "Regenerate figure data from a preset");
    figures_cmd->add_option("name", figure_name, "fig1, fig3 or fig7")->required();
    figures_cmd->add_option("--mode", figure_mode, "analytic, montecarlo or both");
    figures_cmd->add_option("--mc-trials", figure_trials, "Monte Carlo trials per point (default 100000)");

    std::string log_path;
    auto* validate_cmd = app.add_subcommand("validate-log", "Check an event log against the switch rules");
    validate_cmd->add_option("path", log_path, "JSONL event log")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (analytic->parsed()) return run_analytic(g);
        if (simulate_cmd->parsed()) return run_simulate(g, event_log, log_trials);
        if (sweep_cmd->parsed()) return run_sweep_command(g, axis_specs, sweep_mode, cycles_from_target);
        if (switches_cmd->parsed()) return run_switches(g, p_list, n_list, q_flag);
        if (figures_cmd->parsed()) return run_figures(g, figure_name, figure_mode, figure_trials);
        if (validate_cmd->parsed()) return validate_log_file(log_path);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
