#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "memcentric/common/bit_row.hpp"
#include "memcentric/dram/types.hpp"

namespace memcentric::smd {

enum class TaskKind { refresh, rh_mitigation, scrub };

inline const char* to_string(TaskKind k) {
    switch (k) {
    case TaskKind::refresh: return "refresh";
    case TaskKind::rh_mitigation: return "rh_mitigation";
    case TaskKind::scrub: return "scrub";
    }
    return "?";
}

struct MaintenanceTask {
    TaskKind kind = TaskKind::refresh;
    Region region;                 // rows the task maintains
    Cycle duration = 1;
    Cycle due_cycle = 0;
    std::vector<RowIndex> hot_rows; // rh_mitigation: rows whose victims get refreshed

    friend bool operator==(const MaintenanceTask&, const MaintenanceTask&) = default;
};

struct RegionLock {
    Region region;   // locked rows; may be wider than task.region (blocking baseline)
    MaintenanceTask task;
    Cycle begin_cycle = 0;
    Cycle release_cycle = 0;
    friend bool operator==(const RegionLock&, const RegionLock&) = default;
};

class RegionLockTable {
  public:
    const std::vector<RegionLock>& locks() const { return locks_; }
    bool empty() const { return locks_.empty(); }

    const RegionLock* find(const RowAddress& a) const {
        for (const auto& l : locks_)
            if (l.region.contains(a))
                return &l;
        return nullptr;
    }

    bool overlaps(const Region& r) const {
        for (const auto& l : locks_)
            if (l.region.overlaps(r))
                return true;
        return false;
    }

    void insert(RegionLock lock) {
        if (overlaps(lock.region))
            throw SchedulingError("region " + to_string(lock.region) + " is already locked");
        locks_.push_back(std::move(lock));
    }

    // Removes and returns the lock with the earliest release (ties: oldest).
    RegionLock pop_earliest() {
        auto best = locks_.begin();
        for (auto it = locks_.begin(); it != locks_.end(); ++it)
            if (it->release_cycle < best->release_cycle)
                best = it;
        RegionLock l = std::move(*best);
        locks_.erase(best);
        return l;
    }

    Cycle next_release() const {
        Cycle c = ~Cycle{0};
        for (const auto& l : locks_)
            c = std::min(c, l.release_cycle);
        return c;
    }

    bool remove(const Region& r) {
        for (auto it = locks_.begin(); it != locks_.end(); ++it)
            if (it->task.region == r) {
                locks_.erase(it);
                return true;
            }
        return false;
    }

    friend bool operator==(const RegionLockTable&, const RegionLockTable&) = default;

  private:
    std::vector<RegionLock> locks_;
};

struct SmdConfig {
    bool enabled = false;
    RegionScope scope = RegionScope::subarray; // maintenance granularity
    bool blocking = false;   // baseline: every task locks its whole rank
    Cycle refresh_duration = 128;
    Cycle rh_duration = 64;
    Cycle scrub_duration = 256;
    Cycle refresh_period = 0; // 0: tREFW - tREFW/16
    Cycle scrub_period = 0;   // interval between scrub tasks; 0 disables scrubbing
    std::uint32_t rh_threshold = 1024;
    double rh_trigger_fraction = 0.9;
    bool track_reference = false;

    void validate() const {
        if (scope == RegionScope::rank)
            throw ConfigError("smd: scope must be subarray or bank");
        if (refresh_duration == 0 || rh_duration == 0 || scrub_duration == 0)
            throw ConfigError("smd: task durations > 0");
        if (rh_threshold < 1 || !(rh_trigger_fraction > 0 && rh_trigger_fraction <= 1))
            throw ConfigError("smd: rh_threshold >= 1 and 0 < rh_trigger_fraction <= 1");
    }

    std::uint32_t rh_trigger() const {
        const auto t = static_cast<std::uint32_t>(std::ceil(rh_trigger_fraction * rh_threshold));
        return std::max<std::uint32_t>(1, t);
    }

    friend bool operator==(const SmdConfig&, const SmdConfig&) = default;
};

struct SmdStats {
    std::uint64_t nacks = 0;
    std::uint64_t tasks_begun = 0;
    std::uint64_t refresh_tasks = 0;
    std::uint64_t rh_tasks = 0;
    std::uint64_t scrub_tasks = 0;
    std::uint64_t scrub_detections = 0; // flipped bits found
    std::uint64_t scrub_corrections = 0;
    std::uint64_t deferred_begins = 0;
    friend bool operator==(const SmdStats&, const SmdStats&) = default;
};

struct SmdState {
    RegionLockTable locks;
    std::vector<MaintenanceTask> pending; // planned, not yet begun
    std::uint64_t refresh_seq = 0;        // refresh tasks planned so far
    std::uint64_t scrub_seq = 0;
    Cycle clock = 0;                      // maintenance processed up to here
    std::vector<RowIndex> hot_rows;       // crossed the rh trigger, not yet planned
    std::map<RowIndex, BitRow> reference; // scrub reference copies
    SmdStats stats;
    friend bool operator==(const SmdState&, const SmdState&) = default;
};

} // namespace memcentric::smd
