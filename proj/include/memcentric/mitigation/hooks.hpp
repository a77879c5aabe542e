#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "memcentric/dram/state.hpp"

namespace memcentric::mitigation {

inline constexpr std::uint32_t kBlastRadius = 2;

// Refreshes the victims of `aggressor` up to `radius` rows away.
inline std::vector<RowIndex> refresh_victims(DeviceState& s, RowIndex aggressor, std::uint32_t radius, Cycle now) {
    std::vector<RowIndex> done;
    s.for_each_neighbor(aggressor, radius, [&](RowIndex v, std::uint32_t) {
        refresh_row(s, v, now);
        done.push_back(v);
    });
    s.mitigation.stats.victim_refreshes += done.size();
    return done;
}

// PARA: with probability p an activation also refreshes the +-1 neighbors.
inline std::optional<std::vector<RowIndex>> para_on_activate(DeviceState& s, RowIndex row, Cycle now) {
    const Para* para = s.options.mitigation.para();
    if (!para)
        return std::nullopt;
    if (!s.mitigation_rng.bernoulli(para->probability))
        return std::nullopt;
    ++s.mitigation.stats.para_refreshes;
    return refresh_victims(s, row, 1, now);
}

inline void trr_on_activate(DeviceState& s, std::uint32_t bank, RowIndex row) {
    const Trr* trr = s.options.mitigation.trr();
    if (!trr)
        return;
    TrrSampler& sm = s.mitigation.samplers[bank];
    for (auto& e : sm.entries)
        if (e.row == row) {
            ++e.count;
            return;
        }
    TrrEntry fresh{row, 1, sm.sequence++};
    if (sm.entries.size() < trr->sampler_slots) {
        sm.entries.push_back(fresh);
        return;
    }
    // Evict the least-activated entry, oldest first among equals.
    auto victim = std::min_element(sm.entries.begin(), sm.entries.end(), [](const TrrEntry& a, const TrrEntry& b) {
        return a.count != b.count ? a.count < b.count : a.inserted < b.inserted;
    });
    *victim = fresh;
}

// On REF: refresh every victim within the blast radius of the most-activated
// sampled rows of `bank`, then clear its sampler.
inline std::vector<RowIndex> trr_on_refresh(DeviceState& s, std::uint32_t bank, Cycle now) {
    std::vector<RowIndex> refreshed;
    const Trr* trr = s.options.mitigation.trr();
    if (!trr)
        return refreshed;
    TrrSampler& sm = s.mitigation.samplers[bank];
    std::sort(sm.entries.begin(), sm.entries.end(), [](const TrrEntry& a, const TrrEntry& b) {
        return a.count != b.count ? a.count > b.count : a.inserted < b.inserted;
    });
    const std::size_t n = std::min<std::size_t>(trr->per_refresh_checks, sm.entries.size());
    for (std::size_t k = 0; k < n; ++k) {
        auto v = refresh_victims(s, sm.entries[k].row, kBlastRadius, now);
        refreshed.insert(refreshed.end(), v.begin(), v.end());
        ++s.mitigation.stats.trr_refreshes;
    }
    sm.entries.clear();
    return refreshed;
}

// PRAC: the counter was already incremented by the precharge.  Reaching the
// threshold asserts ALERT for the whole rank until recovery completes.
inline bool prac_on_precharge(DeviceState& s, RowIndex row, Cycle now) {
    const Prac* prac = s.options.mitigation.prac();
    if (!prac || s.rows[row].act_counter < prac->threshold)
        return false;
    const auto rank = s.geometry.rank_index(s.geometry.address(row));
    AlertState& a = s.mitigation.alerts[rank];
    if (std::find(a.pending_rows.begin(), a.pending_rows.end(), row) == a.pending_rows.end())
        a.pending_rows.push_back(row);
    if (!a.asserted) {
        a.asserted = true;
        a.since_cycle = now;
        a.release_cycle = now + prac->recovery_cycles;
        ++s.mitigation.stats.alerts;
    }
    return true;
}

// Finishes every recovery whose window has elapsed by `now`.
inline void prac_service(DeviceState& s, Cycle now) {
    const Prac* prac = s.options.mitigation.prac();
    if (!prac)
        return;
    for (auto& a : s.mitigation.alerts) {
        if (!a.asserted || a.release_cycle > now)
            continue;
        for (RowIndex r : a.pending_rows) {
            refresh_victims(s, r, prac->victims_refreshed, a.release_cycle);
            s.rows[r].act_counter = 0;
            ++s.mitigation.stats.prac_recoveries;
        }
        a = AlertState{};
    }
}

} // namespace memcentric::mitigation
