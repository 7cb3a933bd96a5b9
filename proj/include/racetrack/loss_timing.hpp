#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>

#include "racetrack/errors.hpp"

namespace racetrack {

struct LossParams {
    double waveguide_loss_db_per_ns = 0.0;
    double switch_pass_loss_db = 0.0;  ///< insertion loss per switch traversal
    double output_coupling = 1.0;

    void validate() const {
        detail::require_nonnegative(waveguide_loss_db_per_ns, "waveguide loss");
        detail::require_nonnegative(switch_pass_loss_db, "switch pass loss");
        if (!(output_coupling > 0.0 && output_coupling <= 1.0)) {
            throw DomainError("output coupling must lie in (0, 1]");
        }
    }
};

/// All durations in ns.
struct TimingParams {
    double detector_delay = 0.0;     ///< Td
    double classical_delay = 0.0;    ///< Tc
    double switch_on = 50.0;         ///< Tsr, heat-pad activation
    double switch_off = 950.0;       ///< Tsf, cooldown; used as the reset time
    double loop_traversal = 0.0;     ///< eps, un-delayed propagation round the inner loop
    std::optional<double> pump_period;            ///< defaults to the cycle time
    std::optional<double> inner_loop_delay_override;  ///< fixes T - eps directly

    /// T = Td + Tc + Tsr
    double cycle_time() const { return detector_delay + classical_delay + switch_on; }

    double pump_period_ns() const { return pump_period.value_or(cycle_time()); }

    /// Delay element of the inner loop, T - eps unless overridden.
    double inner_loop_delay() const {
        return inner_loop_delay_override.value_or(cycle_time() - loop_traversal);
    }

    void validate() const {
        detail::require_nonnegative(detector_delay, "detector delay");
        detail::require_nonnegative(classical_delay, "classical delay");
        detail::require_nonnegative(switch_on, "switch on delay");
        detail::require_nonnegative(switch_off, "switch off delay");
        detail::require_nonnegative(loop_traversal, "loop traversal time");
        if (pump_period) detail::require_nonnegative(*pump_period, "pump period");
        if (inner_loop_delay_override) {
            detail::require_nonnegative(*inner_loop_delay_override, "inner loop delay");
        } else if (cycle_time() - loop_traversal < 0.0) {
            throw ConfigError("inner loop delay T - eps is negative (loop longer than the cycle)");
        }
    }
};

/// (ln 10 / 10) l_dB: converts a dB attenuation rate to a natural-log rate.
inline double db_to_natural(double loss_db) { return std::numbers::ln10 / 10.0 * loss_db; }

/// Transmission 10^(-l t / 10) after `duration` ns at `loss_db_per_ns`.
inline double survival_probability(double duration, double loss_db_per_ns) {
    if (!(duration >= 0.0) || !(loss_db_per_ns >= 0.0)) {
        throw DomainError("survival_probability: duration and loss must be nonnegative");
    }
    return std::pow(10.0, -loss_db_per_ns * duration / 10.0);
}

/// Survival over `traversals` passes of the inner loop. Each traversal
/// passes `switches_per_traversal` switches.
inline double loop_survival(double loop_delay, std::uint64_t traversals, const LossParams& loss,
                            std::uint64_t switches_per_traversal = 1) {
    const double n = static_cast<double>(traversals);
    const double waveguide = survival_probability(loop_delay * n, loss.waveguide_loss_db_per_ns);
    const double switches = std::pow(10.0, -loss.switch_pass_loss_db * n * static_cast<double>(switches_per_traversal) / 10.0);
    return waveguide * switches;
}

/// Cycle time T; throws ConfigError when T - eps < 0.
inline double cycle_time(const TimingParams& timing) {
    timing.validate();
    return timing.cycle_time();
}

/// t_mux = N t_p + T_reset
inline double repetition_time(std::uint64_t cycles, double pump_period, double reset_time) {
    return static_cast<double>(cycles) * pump_period + reset_time;
}

inline double repetition_rate(std::uint64_t cycles, double pump_period, double reset_time) {
    return 1.0 / repetition_time(cycles, pump_period, reset_time);
}

}  // namespace racetrack
