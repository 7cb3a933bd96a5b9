#pragma once

// Discrete-event Monte Carlo of the racetrack source. Time advances in pump
// cycles; each trial is an independent episode of N cycles followed by the
// output switch and a reset.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "racetrack/config.hpp"
#include "racetrack/event_log.hpp"
#include "racetrack/loss_timing.hpp"

namespace racetrack {

enum class SwitchMode { Ready, InsertPhoton, Bypass, Exhausted };
enum class PadType { DoublePadded, SinglePadded };

struct SwitchState {
    std::uint64_t id = 0;
    std::uint8_t config_count = 0;
    SwitchMode mode = SwitchMode::Ready;
    PadType pad = PadType::DoublePadded;

    std::uint8_t budget() const { return pad == PadType::DoublePadded ? 2 : 1; }
};

/// Switch banks and detector state of one racetrack between resets.
/// Switch slots of a source are used strictly in order, so a bank is a
/// counter plus at most one switch awaiting its bypass configuration.
class RacetrackState {
  public:
    RacetrackState() = default;
    RacetrackState(std::uint32_t sources, std::uint64_t switches_per_source)
        : switches_per_source_(switches_per_source), used_(sources, 0), dead_until_(sources, 0) {}

    std::uint32_t sources() const { return static_cast<std::uint32_t>(used_.size()); }
    std::uint64_t switches_per_source() const { return switches_per_source_; }
    std::uint64_t used(std::uint32_t source) const { return used_.at(source); }
    bool has_ready_switch(std::uint32_t source) const { return used_.at(source) < switches_per_source_; }
    std::optional<std::pair<std::uint32_t, std::uint64_t>> pending_bypass() const { return pending_; }

    SwitchState switch_state(std::uint32_t source, std::uint64_t slot) const {
        SwitchState sw;
        sw.id = static_cast<std::uint64_t>(source) * switches_per_source_ + slot;
        if (slot < used_.at(source)) {
            const bool awaiting = pending_ && pending_->first == source && pending_->second == slot;
            sw.config_count = awaiting ? 1 : 2;
            sw.mode = awaiting ? SwitchMode::InsertPhoton : SwitchMode::Bypass;
        }
        return sw;
    }

    SwitchState output_switch() const {
        SwitchState sw;
        sw.id = static_cast<std::uint64_t>(sources()) * switches_per_source_;
        sw.pad = PadType::SinglePadded;
        if (output_fired_) {
            sw.config_count = 1;
            sw.mode = SwitchMode::Exhausted;
        }
        return sw;
    }

    /// Configure the source's first Ready switch to take the photon in.
    std::uint64_t insert(std::uint32_t source) {
        if (!has_ready_switch(source)) throw std::logic_error("insert on an exhausted source");
        if (pending_) throw std::logic_error("insert while a previous insertion awaits its bypass");
        const std::uint64_t slot = used_[source]++;
        pending_ = {source, slot};
        return slot;
    }

    /// Second configuration of the pending switch: forward along the outer loop.
    std::pair<std::uint32_t, std::uint64_t> bypass() {
        if (!pending_) throw std::logic_error("bypass without a pending insertion");
        const auto done = *pending_;
        pending_.reset();
        return done;
    }

    void fire_output() {
        if (output_fired_) throw std::logic_error("output switch already configured");
        output_fired_ = true;
    }

    bool detector_dead(std::uint32_t source, std::uint64_t cycle) const { return cycle < dead_until_[source]; }
    void mark_click(std::uint32_t source, std::uint64_t cycle, std::uint64_t dead_cycles) {
        dead_until_[source] = cycle + dead_cycles + 1;
    }

    /// All pads deactivated, every switch back to Ready.
    void reset() {
        std::fill(used_.begin(), used_.end(), 0);
        std::fill(dead_until_.begin(), dead_until_.end(), 0);
        pending_.reset();
        output_fired_ = false;
    }

  private:
    std::uint64_t switches_per_source_ = 0;
    std::vector<std::uint64_t> used_;
    std::vector<std::uint64_t> dead_until_;  // first cycle the detector can click again
    std::optional<std::pair<std::uint32_t, std::uint64_t>> pending_;
    bool output_fired_ = false;
};

inline RacetrackState reset_source(RacetrackState state) {
    state.reset();
    return state;
}

/// How loop loss is sampled. Both give the same output marginal; only
/// PerTraversal attributes losses to cycles in the event log.
enum class LossSampling { PerTraversal, Terminal };

struct SimulationOptions {
    unsigned workers = 0;          ///< 0: hardware concurrency
    std::size_t log_trials = 0;    ///< keep event logs of the first k trials
    LossSampling sampling = LossSampling::PerTraversal;
};

struct SimulationResult {
    double output_prob = 0.0;
    double ci99 = 0.0;  ///< half-width of the symmetric interval enclosing the 99% Wilson interval
    std::uint64_t trials = 0;
    std::uint64_t successes = 0;
    std::vector<std::uint64_t> switch_usage;  ///< configurations applied to slot i, all sources and trials
    double discarded_photons = 0.0;           ///< mean per run
    double exhausted_runs = 0.0;              ///< fraction of runs that ran out of switches
    double t_mux_effective = 0.0;             ///< ns, N t_p + T_sf
    std::vector<CycleEventLog> logs;

    bool operator==(const SimulationResult&) const = default;
};

struct EpisodeOutcome {
    bool photon_out = false;
    std::uint64_t discarded = 0;
    bool exhausted = false;
    std::uint64_t insertions = 0;
};

inline constexpr double kZ99 = 2.5758293035489004;

/// splitmix64 finaliser, used to derive independent stream seeds.
/// Wilson score interval at z, widened to be symmetric about the estimate.
/// Unlike the plain normal approximation it keeps a nonzero width at 0 and 1.
inline double wilson_half_width(double estimate, double trials, double z = kZ99) {
    const double z2n = z * z / trials;
    const double centre = (estimate + z2n / 2.0) / (1.0 + z2n);
    const double half = z / (1.0 + z2n) * std::sqrt(estimate * (1.0 - estimate) / trials + z2n / (4.0 * trials));
    return std::abs(centre - estimate) + half;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::mt19937_64 trial_stream(std::uint64_t seed, std::uint64_t trial) {
    return std::mt19937_64(mix_seed(seed, trial));
}

namespace detail {

struct PreparedModel {
    double herald_prob = 0.0;
    double photon_given_herald = 1.0;
    double survival = 1.0;
    double output_factor = 1.0;
    std::uint32_t sources = 1;
    std::uint64_t cycles = 1;
    std::uint64_t switches = 1;
    std::uint64_t dead_cycles = 0;
    StoragePolicy policy = StoragePolicy::ReplaceWithLatest;
    LossSampling sampling = LossSampling::PerTraversal;
};

inline PreparedModel prepare(const RacetrackConfig& config, LossSampling sampling) {
    config.validate();
    const SourceStatistics source = source_statistics(config);
    PreparedModel m;
    m.herald_prob = source.herald_prob;
    m.photon_given_herald = source.photon_given_herald;
    m.survival = loop_survival(config.timing.inner_loop_delay(), 1, config.loss);
    m.output_factor = output_factor(config);
    m.sources = config.plan.sources;
    m.cycles = config.plan.cycles;
    m.switches = config.switches_per_source;
    m.dead_cycles = config.dead_time_cycles;
    m.policy = config.plan.policy;
    m.sampling = sampling;
    return m;
}

inline bool draw(std::mt19937_64& rng, double prob) {
    if (prob >= 1.0) return true;
    if (prob <= 0.0) return false;
    return std::bernoulli_distribution(prob)(rng);
}

/// Calls visit(source) for each source whose herald fires this cycle, in
/// ascending index order, by geometric skipping.
template <typename Visit>
void for_each_herald(std::mt19937_64& rng, double prob, std::uint32_t sources, Visit&& visit) {
    if (prob <= 0.0) return;
    if (prob >= 1.0) {
        for (std::uint32_t s = 0; s < sources; ++s) visit(s);
        return;
    }
    std::geometric_distribution<std::uint64_t> gap(prob);
    for (std::uint64_t s = gap(rng); s < sources; s += 1 + gap(rng)) visit(static_cast<std::uint32_t>(s));
}

inline EpisodeOutcome run_episode(const PreparedModel& m, RacetrackState& state, std::mt19937_64& rng,
                                  CycleEventLog* log, std::vector<std::uint64_t>* usage) {
    state.reset();
    EpisodeOutcome outcome;
    bool inserted_any = false;
    bool alive = false;
    std::uint64_t inserted_at = 0;
    std::uint64_t traversals = 0;

    auto apply_bypass = [&](CycleRecord* rec) {
        if (!state.pending_bypass()) return;
        const auto [source, slot] = state.bypass();
        if (usage) ++(*usage)[slot];
        if (rec) rec->actions.push_back({SwitchAction::Bypass, source, slot});
    };

    for (std::uint64_t cycle = 0; cycle < m.cycles; ++cycle) {
        CycleRecord record;
        CycleRecord* rec = log ? &record : nullptr;
        if (rec) rec->cycle = cycle;

        apply_bypass(rec);

        std::optional<std::uint32_t> selected;
        bool selected_photon = false;
        const bool accepting = m.policy == StoragePolicy::ReplaceWithLatest || !inserted_any;
        for_each_herald(rng, m.herald_prob, m.sources, [&](std::uint32_t source) {
            if (state.detector_dead(source, cycle)) return;
            if (m.dead_cycles > 0) state.mark_click(source, cycle, m.dead_cycles);
            const bool photon = draw(rng, m.photon_given_herald);
            if (rec) rec->heralds.push_back(source);
            if (accepting && !selected) {
                if (state.has_ready_switch(source)) {
                    selected = source;
                    selected_photon = photon;
                    return;
                }
                outcome.exhausted = true;
            }
            if (photon) {
                ++outcome.discarded;
                if (rec) ++rec->discarded;
            }
        });

        if (selected) {
            if (alive) {
                ++outcome.discarded;
                if (rec) ++rec->discarded;
            }
            const std::uint64_t slot = state.insert(*selected);
            ++outcome.insertions;
            if (usage) ++(*usage)[slot];
            if (rec) {
                rec->selected = selected;
                rec->actions.push_back({SwitchAction::Insert, *selected, slot});
            }
            inserted_any = true;
            alive = selected_photon;
            inserted_at = cycle;
            traversals = 0;
        }

        if (alive) {
            if (m.sampling == LossSampling::PerTraversal) {
                if (m.survival < 1.0) {
                    alive = draw(rng, m.survival);
                    if (rec) rec->survived = alive;
                }
            } else {
                ++traversals;
            }
        }
        if (rec) {
            rec->photon_stored = alive;
            rec->stored_age = inserted_any ? cycle - inserted_at : 0;
            log->records.push_back(std::move(record));
        }
    }

    CycleRecord readout;
    CycleRecord* rec = log ? &readout : nullptr;
    if (rec) rec->cycle = m.cycles;
    apply_bypass(rec);
    state.fire_output();
    if (rec) rec->actions.push_back({SwitchAction::Output, 0, 0});
    if (alive && m.sampling == LossSampling::Terminal) {
        alive = draw(rng, std::pow(m.survival, static_cast<double>(traversals)));
    }
    outcome.photon_out = alive && draw(rng, m.output_factor);
    if (rec) {
        rec->photon_stored = alive;
        rec->stored_age = inserted_any ? m.cycles - inserted_at : 0;
        rec->output = outcome.photon_out;
        log->records.push_back(std::move(readout));
    }
    return outcome;
}

}  // namespace detail

/// One episode on the stream of `trial`; fills `log` when given.
inline EpisodeOutcome simulate_episode(const RacetrackConfig& config, std::uint64_t trial,
                                       CycleEventLog* log = nullptr,
                                       LossSampling sampling = LossSampling::PerTraversal) {
    const detail::PreparedModel model = detail::prepare(config, sampling);
    RacetrackState state(model.sources, model.switches);
    auto rng = trial_stream(config.rng_seed, trial);
    if (log) {
        *log = CycleEventLog{trial, model.sources, model.switches, model.cycles, {}};
    }
    return detail::run_episode(model, state, rng, log, nullptr);
}

/// Runs `trials` independent episodes. Trial i always draws from the stream
/// derived from (rng_seed, i), so the result does not depend on the worker
/// count.
inline SimulationResult simulate(const RacetrackConfig& config, std::uint64_t trials,
                                 const SimulationOptions& options = {}) {
    if (trials < 1) throw DomainError("simulate: trials must be >= 1");
    const detail::PreparedModel model = detail::prepare(config, options.sampling);

    struct Partial {
        std::uint64_t successes = 0;
        std::uint64_t discarded = 0;
        std::uint64_t exhausted = 0;
        std::vector<std::uint64_t> usage;
        std::vector<CycleEventLog> logs;
    };

    unsigned workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, trials));
    std::vector<Partial> partials(workers);

    auto run_range = [&](unsigned w, std::uint64_t begin, std::uint64_t end) {
        Partial& part = partials[w];
        part.usage.assign(model.switches, 0);
        RacetrackState state(model.sources, model.switches);
        for (std::uint64_t t = begin; t < end; ++t) {
            auto rng = trial_stream(config.rng_seed, t);
            CycleEventLog* log = nullptr;
            if (t < options.log_trials) {
                part.logs.push_back(CycleEventLog{t, model.sources, model.switches, model.cycles, {}});
                log = &part.logs.back();
            }
            const EpisodeOutcome outcome = detail::run_episode(model, state, rng, log, &part.usage);
            part.successes += outcome.photon_out ? 1 : 0;
            part.discarded += outcome.discarded;
            part.exhausted += outcome.exhausted ? 1 : 0;
        }
    };

    const std::uint64_t chunk = (trials + workers - 1) / workers;
    if (workers == 1) {
        run_range(0, 0, trials);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            const std::uint64_t begin = std::min(trials, w * chunk);
            const std::uint64_t end = std::min(trials, begin + chunk);
            pool.emplace_back(run_range, w, begin, end);
        }
        for (auto& t : pool) t.join();
    }

    SimulationResult result;
    result.trials = trials;
    result.switch_usage.assign(model.switches, 0);
    std::uint64_t discarded = 0;
    std::uint64_t exhausted = 0;
    for (auto& part : partials) {
        result.successes += part.successes;
        discarded += part.discarded;
        exhausted += part.exhausted;
        for (std::size_t i = 0; i < part.usage.size(); ++i) result.switch_usage[i] += part.usage[i];
        for (auto& log : part.logs) result.logs.push_back(std::move(log));
    }
    const double n = static_cast<double>(trials);
    result.output_prob = static_cast<double>(result.successes) / n;
    result.ci99 = wilson_half_width(result.output_prob, n);
    result.discarded_photons = static_cast<double>(discarded) / n;
    result.exhausted_runs = static_cast<double>(exhausted) / n;
    result.t_mux_effective =
        repetition_time(config.plan.cycles, config.timing.pump_period_ns(), config.timing.switch_off);
    return result;
}

}  // namespace racetrack
