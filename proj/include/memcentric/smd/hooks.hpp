#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "memcentric/dram/state.hpp"

namespace memcentric::smd {

// All regions of the configured scope, in address order.
inline std::vector<Region> all_regions(const DramGeometry& g, RegionScope scope) {
    std::vector<Region> out;
    for (std::uint32_t ch = 0; ch < g.channels; ++ch)
        for (std::uint32_t ra = 0; ra < g.ranks_per_channel; ++ra) {
            if (scope == RegionScope::rank) {
                out.push_back({scope, ch, ra, 0, 0});
                continue;
            }
            for (std::uint32_t ba = 0; ba < g.banks_per_rank; ++ba) {
                if (scope == RegionScope::bank) {
                    out.push_back({scope, ch, ra, ba, 0});
                    continue;
                }
                for (std::uint32_t sa = 0; sa < g.subarrays_per_bank; ++sa)
                    out.push_back({scope, ch, ra, ba, sa});
            }
        }
    return out;
}

inline std::uint64_t region_count(const DramGeometry& g, RegionScope scope) {
    std::uint64_t n = std::uint64_t{g.channels} * g.ranks_per_channel;
    if (scope != RegionScope::rank)
        n *= g.banks_per_rank;
    if (scope == RegionScope::subarray)
        n *= g.subarrays_per_bank;
    return n;
}

// The k-th region of all_regions(), without materializing the list.
inline Region region_at(const DramGeometry& g, RegionScope scope, std::uint64_t k) {
    Region r{scope, 0, 0, 0, 0};
    if (scope == RegionScope::subarray) {
        r.subarray = static_cast<std::uint32_t>(k % g.subarrays_per_bank);
        k /= g.subarrays_per_bank;
    }
    if (scope != RegionScope::rank) {
        r.bank = static_cast<std::uint32_t>(k % g.banks_per_rank);
        k /= g.banks_per_rank;
    }
    r.rank = static_cast<std::uint32_t>(k % g.ranks_per_channel);
    r.channel = static_cast<std::uint32_t>(k / g.ranks_per_channel);
    return r;
}

template <typename Fn>
void for_each_row(const DramGeometry& g, const Region& r, Fn&& fn) {
    const std::uint32_t ba_lo = r.scope == RegionScope::rank ? 0 : r.bank;
    const std::uint32_t ba_hi = r.scope == RegionScope::rank ? g.banks_per_rank : r.bank + 1;
    for (std::uint32_t ba = ba_lo; ba < ba_hi; ++ba) {
        const std::uint32_t sa_lo = r.scope == RegionScope::subarray ? r.subarray : 0;
        const std::uint32_t sa_hi = r.scope == RegionScope::subarray ? r.subarray + 1 : g.subarrays_per_bank;
        for (std::uint32_t sa = sa_lo; sa < sa_hi; ++sa)
            for (std::uint32_t row = 0; row < g.rows_per_subarray; ++row)
                fn(g.flat({r.channel, r.rank, ba, sa, row}));
    }
}

inline Region lock_region(const SmdConfig& cfg, const Region& task_region) {
    if (!cfg.blocking)
        return task_region;
    return Region{RegionScope::rank, task_region.channel, task_region.rank, 0, 0};
}

inline Cycle refresh_period(const SmdConfig& cfg, const TimingParams& t) {
    return cfg.refresh_period ? cfg.refresh_period : t.tREFW - t.tREFW / 16;
}

inline Cycle refresh_interval(const DeviceState& s) {
    const auto regions = region_count(s.geometry, s.options.smd.scope);
    return std::max<Cycle>(1, refresh_period(s.options.smd, s.timing) / regions);
}

// ACT into a locked region is rejected with the lock's region.  Only
// row-opening is gated: a row open in a region cannot be locked (see
// begin_pending), so column commands never reach a locked row.
inline std::optional<Region> smd_filter(const DeviceState& s, const Command& cmd) {
    if (!s.options.smd.enabled || cmd.kind != CommandKind::ACT)
        return std::nullopt;
    if (const RegionLock* l = s.smd.locks.find(cmd.addr))
        return l->region;
    return std::nullopt;
}

// Counter reached the chip-internal trigger; mitigated on the next plan.
inline void on_precharge(DeviceState& s, RowIndex row) {
    const SmdConfig& cfg = s.options.smd;
    if (!cfg.enabled || s.rows[row].act_counter < cfg.rh_trigger())
        return;
    if (std::find(s.smd.hot_rows.begin(), s.smd.hot_rows.end(), row) == s.smd.hot_rows.end())
        s.smd.hot_rows.push_back(row);
}

// Tasks that became due at or before `cycle`.  Refresh visits regions
// round-robin, one every refresh_period / regions cycles, so one period
// covers every row exactly once.
inline std::vector<MaintenanceTask> smd_plan(DeviceState& s, Cycle cycle) {
    std::vector<MaintenanceTask> out;
    const SmdConfig& cfg = s.options.smd;
    if (!cfg.enabled)
        return out;
    const auto regions = region_count(s.geometry, cfg.scope);

    if (!s.smd.hot_rows.empty()) {
        for (RowIndex row : s.smd.hot_rows) {
            const Region r = Region::of(s.geometry.address(row), cfg.scope);
            auto same = [&](const MaintenanceTask& t) { return t.kind == TaskKind::rh_mitigation && t.region == r; };
            auto it = std::find_if(s.smd.pending.begin(), s.smd.pending.end(), same);
            if (it == s.smd.pending.end()) {
                it = std::find_if(out.begin(), out.end(), same);
                if (it == out.end()) {
                    out.push_back({TaskKind::rh_mitigation, r, cfg.rh_duration, cycle, {}});
                    it = out.end() - 1;
                }
            }
            if (std::find(it->hot_rows.begin(), it->hot_rows.end(), row) == it->hot_rows.end())
                it->hot_rows.push_back(row);
        }
        s.smd.hot_rows.clear();
    }

    const Cycle interval = refresh_interval(s);
    while ((s.smd.refresh_seq + 1) * interval <= cycle) {
        out.push_back({TaskKind::refresh, region_at(s.geometry, cfg.scope, s.smd.refresh_seq % regions), cfg.refresh_duration,
                       (s.smd.refresh_seq + 1) * interval, {}});
        ++s.smd.refresh_seq;
    }
    if (cfg.scrub_period) {
        while ((s.smd.scrub_seq + 1) * cfg.scrub_period <= cycle) {
            out.push_back({TaskKind::scrub, region_at(s.geometry, cfg.scope, s.smd.scrub_seq % regions), cfg.scrub_duration,
                           (s.smd.scrub_seq + 1) * cfg.scrub_period, {}});
            ++s.smd.scrub_seq;
        }
    }
    return out;
}

inline Cycle next_plan_due(const DeviceState& s) {
    const SmdConfig& cfg = s.options.smd;
    Cycle next = (s.smd.refresh_seq + 1) * refresh_interval(s);
    if (cfg.scrub_period)
        next = std::min(next, (s.smd.scrub_seq + 1) * cfg.scrub_period);
    return next;
}

inline void smd_begin(DeviceState& s, const MaintenanceTask& task, Cycle now) {
    if (task.duration == 0)
        throw SchedulingError("maintenance task with zero duration");
    RegionLock lock{lock_region(s.options.smd, task.region), task, now, now + task.duration};
    s.smd.locks.insert(std::move(lock));
    ++s.smd.stats.tasks_begun;
}

// Applies the task's effect at the end of its lock.
inline void smd_apply(DeviceState& s, const MaintenanceTask& task, Cycle now) {
    switch (task.kind) {
    case TaskKind::refresh:
        for_each_row(s.geometry, task.region, [&](RowIndex r) { refresh_row(s, r, now); });
        ++s.smd.stats.refresh_tasks;
        break;
    case TaskKind::rh_mitigation:
        for (RowIndex hot : task.hot_rows) {
            s.for_each_neighbor(hot, 2, [&](RowIndex v, std::uint32_t) { refresh_row(s, v, now); });
            s.rows[hot].act_counter = 0;
        }
        ++s.smd.stats.rh_tasks;
        break;
    case TaskKind::scrub:
        for_each_row(s.geometry, task.region, [&](RowIndex r) {
            auto it = s.smd.reference.find(r);
            if (it == s.smd.reference.end())
                return;
            const std::size_t bad = s.rows[r].data.hamming(it->second);
            if (bad) {
                s.smd.stats.scrub_detections += bad;
                s.smd.stats.scrub_corrections += bad;
                s.rows[r].data = it->second;
            }
        });
        ++s.smd.stats.scrub_tasks;
        break;
    }
}

// Unlocks the task's region and applies its effect.
inline void smd_complete(DeviceState& s, const MaintenanceTask& task, Cycle now) {
    if (!s.smd.locks.remove(task.region))
        throw SchedulingError("completing a task whose region " + to_string(task.region) + " is not locked");
    smd_apply(s, task, now);
}

// Latest close time of any bank touching `r`, or nullopt if a row in `r` is open.
inline std::optional<Cycle> region_quiet_since(const DeviceState& s, const Region& r) {
    Cycle since = 0;
    const auto& g = s.geometry;
    for (std::uint32_t ba = 0; ba < g.banks_per_rank; ++ba) {
        if (r.scope != RegionScope::rank && ba != r.bank)
            continue;
        const BankState& b = s.banks[g.bank_index({r.channel, r.rank, ba, 0, 0})];
        if (b.open_row) {
            const RowAddress open{r.channel, r.rank, ba, *b.open_row / g.rows_per_subarray,
                                  *b.open_row % g.rows_per_subarray};
            if (r.contains(open))
                return std::nullopt;
        }
        since = std::max(since, b.closed_at);
    }
    return since;
}

// Starts pending tasks whose lock region is free and has no open row.
// rh_mitigation tasks go first.
inline void begin_pending(DeviceState& s, Cycle t) {
    auto& pending = s.smd.pending;
    std::stable_partition(pending.begin(), pending.end(),
                          [](const MaintenanceTask& x) { return x.kind == TaskKind::rh_mitigation; });
    for (auto it = pending.begin(); it != pending.end();) {
        const Region lr = lock_region(s.options.smd, it->region);
        if (s.smd.locks.overlaps(lr)) {
            ++it;
            continue;
        }
        auto quiet = region_quiet_since(s, lr);
        if (!quiet) {
            ++s.smd.stats.deferred_begins;
            ++it;
            continue;
        }
        smd_begin(s, *it, std::max({t, *quiet, it->due_cycle}));
        it = pending.erase(it);
    }
}

// Runs the chip's autonomous maintenance up to cycle `to`.
inline void smd_service(DeviceState& s, Cycle to) {
    if (!s.options.smd.enabled)
        return;
    Cycle t = s.smd.clock;
    for (;;) {
        while (!s.smd.locks.empty() && s.smd.locks.next_release() <= t) {
            RegionLock l = s.smd.locks.pop_earliest();
            smd_apply(s, l.task, l.release_cycle);
        }
        auto due = smd_plan(s, t);
        s.smd.pending.insert(s.smd.pending.end(), due.begin(), due.end());
        begin_pending(s, t);
        const Cycle next = std::min(s.smd.locks.next_release(), next_plan_due(s));
        if (next > to)
            break;
        t = std::max(t, next);
    }
    s.smd.clock = std::max(s.smd.clock, to);
}

} // namespace memcentric::smd
