#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "memcentric/common/random.hpp"
#include "memcentric/disturbance/profile.hpp"
#include "memcentric/dram/row_state.hpp"
#include "memcentric/dram/types.hpp"
#include "memcentric/mitigation/config.hpp"
#include "memcentric/smd/types.hpp"

namespace memcentric {

// Everything attached to a device besides geometry and timing.
struct DeviceOptions {
    disturbance::DisturbanceProfile disturbance;
    mitigation::MitigationConfig mitigation;
    smd::SmdConfig smd;

    void validate() const {
        disturbance.validate();
        mitigation.validate();
        smd.validate();
    }

    friend bool operator==(const DeviceOptions&, const DeviceOptions&) = default;
};

struct DeviceStats {
    std::array<std::uint64_t, 5> commands{}; // executed, by CommandKind
    std::uint64_t rejected = 0;
    std::uint64_t refreshed_rows = 0;
    std::uint64_t pud_ops = 0;
    friend bool operator==(const DeviceStats&, const DeviceStats&) = default;
};

struct DeviceState {
    DramGeometry geometry;
    TimingParams timing;
    std::uint64_t seed = 0;
    DeviceOptions options;

    std::vector<RowState> rows;
    std::vector<BankState> banks;
    std::vector<Cycle> channel_now;
    std::vector<std::uint32_t> refresh_cursor; // per rank: next bank-local row of the REF rotation

    Rng disturbance_rng;
    Rng mitigation_rng;
    Rng pud_rng;

    mitigation::MitigationState mitigation;
    smd::SmdState smd;
    std::vector<disturbance::BitflipEvent> events;
    DeviceStats stats;

    friend bool operator==(const DeviceState&, const DeviceState&) = default;

    RowState& row(RowIndex i) { return rows[i]; }
    const RowState& row(RowIndex i) const { return rows[i]; }

    const disturbance::DisturbanceProfile& profile() const { return options.disturbance; }

    // Rows sharing a REF command: ceil(rows per bank / REFs per window).
    std::uint32_t refresh_group_rows() const {
        const Cycle refs = std::max<Cycle>(1, timing.tREFW / timing.tREFI);
        return static_cast<std::uint32_t>((geometry.rows_per_bank() + refs - 1) / refs);
    }

    // Calls fn(victim, distance) for victims of `aggressor` up to `radius`
    // rows away inside the same subarray.
    template <typename Fn>
    void for_each_neighbor(RowIndex aggressor, std::uint32_t radius, Fn&& fn) const {
        const std::uint32_t r = aggressor % geometry.rows_per_subarray;
        for (std::uint32_t d = 1; d <= radius; ++d) {
            if (r >= d)
                fn(aggressor - d, d);
            if (r + d < geometry.rows_per_subarray)
                fn(aggressor + d, d);
        }
    }
};

// Restores a row's charge: clears its disturbance and draws the threshold
// for the next window.
inline void refresh_row(DeviceState& s, RowIndex idx, Cycle now) {
    RowState& row = s.rows[idx];
    row.disturbance = 0.0;
    row.last_refresh_cycle = now;
    if (s.options.disturbance.enabled)
        disturbance::resample_vrd(row, s.options.disturbance, s.disturbance_rng);
    ++s.stats.refreshed_rows;
}

} // namespace memcentric
