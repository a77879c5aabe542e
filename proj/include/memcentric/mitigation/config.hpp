#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "memcentric/dram/types.hpp"

namespace memcentric::mitigation {

// Probabilistic adjacent row refresh on every activation.
struct Para {
    double probability = 0.001;
    friend bool operator==(const Para&, const Para&) = default;
};

// Frequency sampler refreshed on REF; bypassable by design.
struct Trr {
    std::uint32_t sampler_slots = 4;
    std::uint32_t per_refresh_checks = 1;
    friend bool operator==(const Trr&, const Trr&) = default;
};

// Per-row activation counters with ALERT back-off.
struct Prac {
    std::uint32_t threshold = 32;
    Cycle recovery_cycles = 350;
    std::uint32_t victims_refreshed = 2; // refreshes +-1 .. +-victims_refreshed
    friend bool operator==(const Prac&, const Prac&) = default;
};

struct MitigationConfig {
    std::variant<std::monostate, Para, Trr, Prac> kind;

    bool none() const { return std::holds_alternative<std::monostate>(kind); }
    const Para* para() const { return std::get_if<Para>(&kind); }
    const Trr* trr() const { return std::get_if<Trr>(&kind); }
    const Prac* prac() const { return std::get_if<Prac>(&kind); }

    std::string name() const {
        if (para())
            return "para";
        if (trr())
            return "trr";
        if (prac())
            return "prac";
        return "none";
    }

    void validate() const {
        if (auto p = para(); p && !(p->probability > 0.0 && p->probability <= 1.0))
            throw ConfigError("mitigation: 0 < p <= 1");
        if (auto t = trr(); t && (t->sampler_slots < 1 || t->per_refresh_checks < 1))
            throw ConfigError("mitigation: sampler_slots >= 1 and per_refresh_checks >= 1");
        if (auto p = prac(); p && (p->threshold < 1 || p->recovery_cycles < 1))
            throw ConfigError("mitigation: threshold >= 1 and recovery_cycles >= 1");
    }

    friend bool operator==(const MitigationConfig&, const MitigationConfig&) = default;
};

struct AlertState {
    bool asserted = false;
    Cycle since_cycle = 0;
    Cycle release_cycle = 0;
    std::vector<RowIndex> pending_rows;

    friend bool operator==(const AlertState&, const AlertState&) = default;
};

struct TrrEntry {
    RowIndex row = 0;
    std::uint32_t count = 0;
    std::uint64_t inserted = 0;
    friend bool operator==(const TrrEntry&, const TrrEntry&) = default;
};

struct TrrSampler {
    std::vector<TrrEntry> entries;
    std::uint64_t sequence = 0;
    friend bool operator==(const TrrSampler&, const TrrSampler&) = default;
};

struct MitigationStats {
    std::uint64_t para_refreshes = 0;    // PARA trigger events
    std::uint64_t trr_refreshes = 0;     // aggressors mitigated on REF
    std::uint64_t alerts = 0;
    std::uint64_t alert_rejections = 0;
    std::uint64_t prac_recoveries = 0;
    std::uint64_t victim_refreshes = 0;  // rows refreshed by any mitigation
    friend bool operator==(const MitigationStats&, const MitigationStats&) = default;
};

struct MitigationState {
    std::vector<AlertState> alerts;    // per channel x rank
    std::vector<TrrSampler> samplers;  // per bank
    MitigationStats stats;
    friend bool operator==(const MitigationState&, const MitigationState&) = default;
};

} // namespace memcentric::mitigation
