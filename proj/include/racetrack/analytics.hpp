#pragma once

// Closed-form design math for the racetrack source: pump-cycle counts,
// binomial switch sizing and the analytic photon output probability.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "racetrack/errors.hpp"
#include "racetrack/loss_timing.hpp"
#include "racetrack/optics.hpp"

namespace racetrack {

enum class StoragePolicy { ReplaceWithLatest, KeepFirst };

/// Where the detector efficiency enters: as a factor on the routed output
/// photon, or as a thinning of the per-source generation probability.
enum class EtaPlacement { Output, Herald };

inline const char* to_string(StoragePolicy policy) {
    return policy == StoragePolicy::ReplaceWithLatest ? "replace-latest" : "keep-first";
}

inline const char* to_string(EtaPlacement placement) {
    return placement == EtaPlacement::Output ? "output" : "herald";
}

struct ExperimentPlan {
    std::uint32_t sources = 1;
    std::uint64_t cycles = 1;
    double gen_prob = 0.05;        ///< per source, per cycle
    double target_pN = 0.999;      ///< success target used to pick N
    double switch_budget_q = 0.999;
    StoragePolicy policy = StoragePolicy::ReplaceWithLatest;

    void validate() const {
        if (sources < 1) throw DomainError("sources_S must be >= 1");
        if (cycles < 1) throw DomainError("cycles_N must be >= 1");
        detail::require_probability(gen_prob, "gen_prob_p");
        if (!(target_pN >= 0.0 && target_pN < 1.0)) throw DomainError("target_pN must lie in [0, 1)");
        if (!(switch_budget_q > 0.0 && switch_budget_q < 1.0)) {
            throw DomainError("switch_budget_q must lie in (0, 1)");
        }
    }
};

/// N = trunc(log(1 - target) / log(1 - p)). Truncation (not ceiling) gives
/// N = 134 at p = 5%, target 0.999.
inline std::uint64_t pump_cycles_for_target(double p, double target) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("pump_cycles_for_target: p must lie in (0, 1)");
    if (!(target >= 0.0 && target < 1.0)) throw DomainError("pump_cycles_for_target: target must lie in [0, 1)");
    return static_cast<std::uint64_t>(std::log1p(-target) / std::log1p(-p));
}

namespace detail {

inline double log_binomial_term(std::uint64_t k, std::uint64_t n, double p) {
    const double kd = static_cast<double>(k);
    const double nd = static_cast<double>(n);
    return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) + kd * std::log(p) +
           (nd - kd) * std::log1p(-p);
}

}  // namespace detail

/// C(N, k) p^k (1-p)^(N-k), evaluated in log space.
inline double binomial_pmf(std::uint64_t k, std::uint64_t n, double p) {
    if (k > n) throw DomainError("binomial_pmf: k > N");
    detail::require_probability(p, "binomial_pmf: p");
    if (p == 0.0) return k == 0 ? 1.0 : 0.0;
    if (p == 1.0) return k == n ? 1.0 : 0.0;
    return std::exp(detail::log_binomial_term(k, n, p));
}

inline double binomial_cdf(std::uint64_t k, std::uint64_t n, double p) {
    if (k >= n) return 1.0;
    double cdf = 0.0;
    for (std::uint64_t i = 0; i <= k; ++i) cdf += binomial_pmf(i, n, p);
    return std::min(cdf, 1.0);
}

/// Relative slack when comparing a summed CDF against q; exact ties in the
/// reals (e.g. N = 1, p = q = 0.5) must count as meeting q.
inline constexpr double kCdfTieTolerance = 1e-12;

/// Smallest m with sum_{i<=m} C(N,i) p^i (1-p)^(N-i) >= q.
inline std::uint64_t required_switches(double q, std::uint64_t n, double p) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("required_switches: q must lie in (0, 1)");
    if (n < 1) throw DomainError("required_switches: N must be >= 1");
    detail::require_probability(p, "required_switches: p");
    const double threshold = q * (1.0 - kCdfTieTolerance);
    double cdf = 0.0;
    for (std::uint64_t m = 0; m < n; ++m) {
        cdf += binomial_pmf(m, n, p);
        if (cdf >= threshold) return m;
    }
    return n;
}

/// Per-source, per-cycle herald statistics.
struct SourceStatistics {
    double herald_prob = 0.0;
    double photon_given_herald = 1.0;  ///< < 1 only when dark counts herald vacuum
};

/// The composite evaluated by output_probability. Keeps every factor so
/// callers can report the assumptions behind a number.
struct OutputModel {
    double cycle_success = 0.0;        ///< 1 - (1 - h)^S
    double photon_given_herald = 1.0;
    double loop_survival = 1.0;        ///< one inner loop traversal
    double output_factor = 1.0;        ///< eta * coupling, or coupling alone
    std::uint64_t cycles = 1;
    StoragePolicy policy = StoragePolicy::ReplaceWithLatest;
    std::string assumptions;

    /// A photon inserted in cycle k (1-based) traverses the loop N - k + 1
    /// times before the output switch fires after cycle N.
    double probability() const {
        const double pc = cycle_success;
        const double s = loop_survival;
        const auto n = cycles;
        if (pc <= 0.0 || s <= 0.0) return 0.0;
        double sum = 0.0;
        if (policy == StoragePolicy::ReplaceWithLatest) {
            // j = cycles after the last herald
            double term = pc * s;
            const double ratio = (1.0 - pc) * s;
            for (std::uint64_t j = 0; j < n && term > 0.0; ++j) {
                sum += term;
                term *= ratio;
            }
        } else if (pc >= 1.0) {
            sum = std::pow(s, static_cast<double>(n));
        } else {
            const double log_pc = std::log(pc);
            const double log_miss = std::log1p(-pc);
            const double log_s = std::log(s);
            for (std::uint64_t k = 1; k <= n; ++k) {
                sum += std::exp(log_pc + static_cast<double>(k - 1) * log_miss +
                                static_cast<double>(n - k + 1) * log_s);
            }
        }
        return std::clamp(photon_given_herald * output_factor * sum, 0.0, 1.0);
    }
};

inline OutputModel make_output_model(const ExperimentPlan& plan, const TimingParams& timing, const LossParams& loss,
                                     const SourceStatistics& source, double output_factor) {
    plan.validate();
    timing.validate();
    loss.validate();
    OutputModel model;
    model.cycle_success = -std::expm1(static_cast<double>(plan.sources) * std::log1p(-source.herald_prob));
    if (source.herald_prob >= 1.0) model.cycle_success = 1.0;
    model.photon_given_herald = source.photon_given_herald;
    model.loop_survival = loop_survival(timing.inner_loop_delay(), 1, loss);
    model.output_factor = output_factor;
    model.cycles = plan.cycles;
    model.policy = plan.policy;
    return model;
}

/// Analytic output probability with direct per-source generation
/// probability plan.gen_prob. Detector efficiency multiplies the output by
/// default; EtaPlacement::Herald thins p instead.
inline OutputModel output_model(const ExperimentPlan& plan, const TimingParams& timing, const LossParams& loss,
                                const HeraldModel& herald = {},
                                EtaPlacement placement = EtaPlacement::Output) {
    herald.validate();
    SourceStatistics source;
    double factor = loss.output_coupling;
    if (placement == EtaPlacement::Output) {
        source.herald_prob = plan.gen_prob;
        factor *= herald.efficiency;
    } else {
        source.herald_prob = plan.gen_prob * herald.efficiency;
    }
    OutputModel model = make_output_model(plan, timing, loss, source, factor);
    model.assumptions = std::string("policy=") + to_string(plan.policy) + ";eta=" + to_string(placement) +
                        ";gen=direct";
    return model;
}

inline double output_probability(const ExperimentPlan& plan, const TimingParams& timing, const LossParams& loss,
                                 const HeraldModel& herald = {},
                                 EtaPlacement placement = EtaPlacement::Output) {
    return output_model(plan, timing, loss, herald, placement).probability();
}

}  // namespace racetrack
