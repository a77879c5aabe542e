#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "memcentric/common/random.hpp"
#include "memcentric/dram/row_state.hpp"
#include "memcentric/dram/types.hpp"

namespace memcentric::disturbance {

// Statistical read-disturbance model.  AC_min is lognormal per row, an
// aggressor held open for t cycles contributes (t / t_ref)^alpha instead of 1,
// and every refresh window rescales the row threshold by a uniform factor in
// [1 / vrd_ratio_max, 1].
struct DisturbanceProfile {
    bool enabled = false;
    double acmin_log_mean = 8.317766166719343; // ln(4096)
    double acmin_log_sigma = 0.9;              // 10th..90th percentile spans ~one decade
    double press_alpha = 2.0 / 3.0;
    Cycle press_ton_ref = 0;                   // 0: use timing.tRAS
    double vrd_ratio_max = 3.5;
    std::array<double, 2> blast_weights{1.0, 0.2}; // distance 1, distance 2 (both sides)
    std::uint32_t flips_per_event = 1;

    void validate() const {
        if (!std::isfinite(acmin_log_mean) || !(acmin_log_sigma >= 0))
            throw ConfigError("disturbance: acmin_log_mean finite and acmin_log_sigma >= 0");
        if (!(press_alpha >= 0))
            throw ConfigError("disturbance: press_alpha >= 0");
        if (!(vrd_ratio_max >= 1))
            throw ConfigError("disturbance: vrd_ratio_max >= 1");
        if (!(blast_weights[1] > 0) || !(blast_weights[0] >= blast_weights[1]) || blast_weights[0] > 1)
            throw ConfigError("disturbance: 1 >= blast weight(+-1) >= blast weight(+-2) > 0");
        if (flips_per_event < 1)
            throw ConfigError("disturbance: flips_per_event >= 1");
    }

    double blast_weight_sum() const { return 2.0 * (blast_weights[0] + blast_weights[1]); }

    // A row whose threshold is the same fixed value in every window.
    static DisturbanceProfile fixture(double acmin) {
        DisturbanceProfile p;
        p.enabled = true;
        p.acmin_log_mean = std::log(acmin);
        p.acmin_log_sigma = 0.0;
        p.vrd_ratio_max = 1.0;
        return p;
    }

    friend bool operator==(const DisturbanceProfile&, const DisturbanceProfile&) = default;
};

enum class FlipCause { rowhammer, rowpress_amplified };

inline const char* to_string(FlipCause c) {
    return c == FlipCause::rowhammer ? "rowhammer" : "rowpress_amplified";
}

struct BitflipEvent {
    RowAddress victim;
    std::vector<std::uint32_t> bit_positions;
    Cycle cycle = 0;
    FlipCause cause = FlipCause::rowhammer;

    friend bool operator==(const BitflipEvent&, const BitflipEvent&) = default;
};

// Relative slack when comparing an accumulated weight against a threshold,
// so that e.g. ten contributions of 1000^(2/3) count as reaching 1000.
inline constexpr double kThresholdSlack = 1e-9;

inline bool crosses(double accumulated, double threshold) {
    return accumulated >= threshold * (1.0 - kThresholdSlack);
}

inline double sample_acmin(const DisturbanceProfile& profile, Rng& rng) {
    return std::exp(profile.acmin_log_mean + profile.acmin_log_sigma * rng.normal());
}

inline double press_weight(Cycle open_cycles, const DisturbanceProfile& profile, const TimingParams& timing) {
    if (open_cycles < timing.tRAS)
        throw ProtocolError("row open for " + std::to_string(open_cycles) + " cycles, less than tRAS");
    if (profile.press_alpha == 0.0)
        return 1.0;
    const Cycle ref = profile.press_ton_ref ? profile.press_ton_ref : timing.tRAS;
    return std::pow(static_cast<double>(open_cycles) / static_cast<double>(ref), profile.press_alpha);
}

inline void resample_vrd(RowState& row, const DisturbanceProfile& profile, Rng& rng) {
    if (profile.vrd_ratio_max <= 1.0) {
        row.acmin_current = row.acmin_base;
        return;
    }
    const double lo = 1.0 / profile.vrd_ratio_max;
    row.acmin_current = row.acmin_base * (lo + (1.0 - lo) * rng.uniform());
}

} // namespace memcentric::disturbance
