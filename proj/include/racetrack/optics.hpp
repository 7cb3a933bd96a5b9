#pragma once

// Pair statistics of a heralded SPDC source and the Mach-Zehnder switch map.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <vector>

#include "racetrack/errors.hpp"

namespace racetrack {

struct SpdcParams {
    double zeta = 0.0;                    ///< squeezing amplitude |zeta| < 1
    std::optional<double> coupling_c;     ///< mW^(-1/2)
    std::optional<double> pump_power_mw;  ///< mW
    int n_max = 10;                       ///< Fock truncation order

    /// Build from pump parameters, zeta = tanh(c P).
    static SpdcParams from_pump(double c, double pump_mw, int n_max = 10);

    void validate() const;
};

struct PairDistribution {
    std::vector<double> probs;     ///< P(n pairs), n = 0..n_max
    double truncation_mass = 0.0;  ///< probability of more than n_max pairs

    double mean_pairs() const {
        double mean = 0.0;
        for (std::size_t n = 1; n < probs.size(); ++n) mean += static_cast<double>(n) * probs[n];
        return mean;
    }
};

/// Non-photon-number-resolving herald detector.
struct HeraldModel {
    double efficiency = 0.9;
    double dark_count_prob = 0.0;

    void validate() const {
        detail::require_probability(efficiency, "detector efficiency");
        detail::require_probability(dark_count_prob, "dark count probability");
    }
};

using Matrix2c = std::array<std::array<std::complex<double>, 2>, 2>;

/// Row i holds the output amplitudes (o1, o2) for a photon entering port i.
struct MziTransfer {
    double theta = 0.0;
    Matrix2c matrix{};

    double bar_probability(std::size_t port = 0) const { return std::norm(matrix[port][port]); }
    double cross_probability(std::size_t port = 0) const { return std::norm(matrix[port][1 - port]); }
};

inline double zeta_from_pump(double c, double pump_mw) {
    if (!(c >= 0.0) || !(pump_mw >= 0.0)) {
        throw DomainError("zeta_from_pump: coupling and pump power must be nonnegative");
    }
    return std::tanh(c * pump_mw);
}

inline SpdcParams SpdcParams::from_pump(double c, double pump_mw, int n_max) {
    SpdcParams params;
    params.zeta = zeta_from_pump(c, pump_mw);
    params.coupling_c = c;
    params.pump_power_mw = pump_mw;
    params.n_max = n_max;
    return params;
}

inline void SpdcParams::validate() const {
    if (!(std::abs(zeta) < 1.0)) throw DomainError("|zeta| must be < 1 (state not normalizable)");
    if (n_max < 1) throw DomainError("n_max must be >= 1");
    if (coupling_c.has_value() != pump_power_mw.has_value()) {
        throw DomainError("coupling_c and pump_power_mw must be given together");
    }
    if (coupling_c && std::abs(std::abs(zeta) - std::tanh(*coupling_c * *pump_power_mw)) > 1e-12) {
        throw DomainError("zeta inconsistent with tanh(c P)");
    }
}

/// P(n) = (1 - |zeta|^2) |zeta|^(2n); the tail beyond n_max is kept as truncation_mass.
inline PairDistribution pair_distribution(const SpdcParams& params) {
    params.validate();
    const double x = params.zeta * params.zeta;
    PairDistribution dist;
    dist.probs.resize(static_cast<std::size_t>(params.n_max) + 1);
    double power = 1.0;
    for (auto& p : dist.probs) {
        p = (1.0 - x) * power;
        power *= x;
    }
    dist.truncation_mass = power;  // x^(n_max+1)
    return dist;
}

namespace detail {

/// sum_{n >= first} P(n) [1 - (1-eta)^n (1-dark)], tail charged as n_max + 1 pairs.
inline double click_mass(const PairDistribution& dist, const HeraldModel& herald, std::size_t first) {
    herald.validate();
    const double miss = 1.0 - herald.efficiency;
    double click = 0.0;
    double miss_pow = 1.0;
    for (std::size_t n = 0; n < dist.probs.size(); ++n) {
        if (n >= first) click += dist.probs[n] * (1.0 - miss_pow * (1.0 - herald.dark_count_prob));
        miss_pow *= miss;
    }
    return click + dist.truncation_mass * (1.0 - miss_pow * (1.0 - herald.dark_count_prob));
}

}  // namespace detail

/// Probability that the herald clicks: sum_n P(n) [1 - (1-eta)^n (1-dark)].
/// The truncated tail is charged as n_max + 1 pairs, exact at eta = 1 and a
/// lower bound otherwise.
inline double herald_click_probability(const PairDistribution& dist, const HeraldModel& herald) {
    return detail::click_mass(dist, herald, 0);
}

/// Joint probability of a click with at least one pair present.
inline double heralded_photon_probability(const PairDistribution& dist, const HeraldModel& herald) {
    return detail::click_mass(dist, herald, 1);
}

/// Conditional probability that a click came from exactly one pair.
inline double heralded_single_purity(const PairDistribution& dist, const HeraldModel& herald) {
    const double click = herald_click_probability(dist, herald);
    if (!(click > 0.0)) throw DomainError("heralded_single_purity: herald never clicks");
    const double single = dist.probs.size() > 1 ? dist.probs[1] : 0.0;
    return single * herald.efficiency / click;
}

namespace detail {

inline Matrix2c multiply(const Matrix2c& a, const Matrix2c& b) {
    Matrix2c out{};
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
    return out;
}

}  // namespace detail

/// Coupler, phase theta on the upper arm, coupler. theta = 0 is the bar
/// state, theta = pi the cross state.
inline MziTransfer mzi_transfer(double theta) {
    const double r = 1.0 / std::numbers::sqrt2;
    const Matrix2c coupler{{{r, r}, {r, -r}}};
    const Matrix2c phase{{{std::polar(1.0, theta), 0.0}, {0.0, 1.0}}};
    return MziTransfer{theta, detail::multiply(detail::multiply(coupler, phase), coupler)};
}

/// Max-norm distance between a and e^{i phi} b, minimised over the global
/// phase phi.
inline double distance_up_to_global_phase(const Matrix2c& a, const Matrix2c& b) {
    std::complex<double> overlap = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) overlap += std::conj(b[i][j]) * a[i][j];
    const std::complex<double> phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : 1.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) worst = std::max(worst, std::abs(a[i][j] - phase * b[i][j]));
    return worst;
}

/// max |(M M^dagger - I)_ij|
inline double unitarity_residual(const Matrix2c& m) {
    double worst = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            std::complex<double> acc = m[i][0] * std::conj(m[j][0]) + m[i][1] * std::conj(m[j][1]);
            if (i == j) acc -= 1.0;
            worst = std::max(worst, std::abs(acc));
        }
    return worst;
}

}  // namespace racetrack
