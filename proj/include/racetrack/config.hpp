#pragma once

#include <cstdint>
#include <string>

#include "racetrack/analytics.hpp"
#include "racetrack/errors.hpp"
#include "racetrack/loss_timing.hpp"
#include "racetrack/optics.hpp"

namespace racetrack {

enum class GenerationMode { DirectP, SpdcDerived };

inline const char* to_string(GenerationMode mode) {
    return mode == GenerationMode::DirectP ? "direct" : "spdc";
}

/// Everything needed to run or evaluate one racetrack design point.
struct RacetrackConfig {
    ExperimentPlan plan;
    TimingParams timing;
    LossParams loss;
    HeraldModel herald;
    std::uint64_t switches_per_source = 16;  ///< m, double-padded switches per source
    GenerationMode generation_mode = GenerationMode::DirectP;
    SpdcParams spdc;
    EtaPlacement eta_placement = EtaPlacement::Output;
    std::uint64_t dead_time_cycles = 0;  ///< herald detector ineligible for d cycles after a click
    std::uint64_t rng_seed = 0xC0FFEE;

    void validate() const {
        plan.validate();
        timing.validate();
        loss.validate();
        herald.validate();
        if (switches_per_source < 1) throw DomainError("switches_per_source_m must be >= 1");
        if (generation_mode == GenerationMode::SpdcDerived) spdc.validate();
    }
};

/// Per-source herald statistics implied by the generation mode. In spdc
/// mode the detector efficiency lives in the herald click probability.
inline SourceStatistics source_statistics(const RacetrackConfig& config) {
    SourceStatistics source;
    if (config.generation_mode == GenerationMode::SpdcDerived) {
        const PairDistribution dist = pair_distribution(config.spdc);
        const double click = herald_click_probability(dist, config.herald);
        source.herald_prob = click;
        source.photon_given_herald = click > 0.0 ? heralded_photon_probability(dist, config.herald) / click : 0.0;
    } else if (config.eta_placement == EtaPlacement::Herald) {
        source.herald_prob = config.plan.gen_prob * config.herald.efficiency;
    } else {
        source.herald_prob = config.plan.gen_prob;
    }
    return source;
}

/// Probability that a photon surviving the loop leaves the output port.
inline double output_factor(const RacetrackConfig& config) {
    const bool eta_on_output =
        config.generation_mode == GenerationMode::DirectP && config.eta_placement == EtaPlacement::Output;
    return config.loss.output_coupling * (eta_on_output ? config.herald.efficiency : 1.0);
}

inline std::string assumptions_tag(const RacetrackConfig& config) {
    std::string tag = std::string("policy=") + to_string(config.plan.policy);
    tag += ";eta=";
    tag += config.generation_mode == GenerationMode::SpdcDerived ? "herald-model" : to_string(config.eta_placement);
    tag += ";gen=";
    tag += to_string(config.generation_mode);
    if (config.dead_time_cycles > 0) tag += ";dead_time=" + std::to_string(config.dead_time_cycles);
    return tag;
}

/// Analytic model for a full config. Ignores the switch budget (assumes m
/// never runs out) and detector dead time.
inline OutputModel output_model(const RacetrackConfig& config) {
    config.validate();
    OutputModel model = make_output_model(config.plan, config.timing, config.loss, source_statistics(config),
                                          output_factor(config));
    model.assumptions = assumptions_tag(config);
    return model;
}

inline double output_probability(const RacetrackConfig& config) { return output_model(config).probability(); }

}  // namespace racetrack
