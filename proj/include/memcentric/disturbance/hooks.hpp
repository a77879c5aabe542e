#pragma once

#include <algorithm>
#include <vector>

#include "memcentric/dram/state.hpp"

namespace memcentric::disturbance {

// Picks `count` distinct columns uniformly (all columns if count >= width).
inline std::vector<std::uint32_t> pick_bits(std::uint32_t width, std::uint32_t count, Rng& rng) {
    std::vector<std::uint32_t> bits;
    if (count >= width) {
        for (std::uint32_t j = 0; j < width; ++j)
            bits.push_back(j);
        return bits;
    }
    while (bits.size() < count) {
        const auto j = static_cast<std::uint32_t>(rng.below(width));
        if (std::find(bits.begin(), bits.end(), j) == bits.end())
            bits.push_back(j);
    }
    std::sort(bits.begin(), bits.end());
    return bits;
}

// Charges every victim in the blast radius with the aggressor's weighted
// contribution and flips bits in victims that reach their threshold.
inline std::vector<BitflipEvent> on_aggressor_precharge(DeviceState& s, RowIndex aggressor, Cycle open_cycles,
                                                        Cycle now) {
    std::vector<BitflipEvent> out;
    const auto& p = s.options.disturbance;
    if (!p.enabled)
        return out;
    const double pw = press_weight(open_cycles, p, s.timing);
    const FlipCause cause = pw > 1.0 ? FlipCause::rowpress_amplified : FlipCause::rowhammer;
    s.for_each_neighbor(aggressor, 2, [&](RowIndex victim, std::uint32_t d) {
        RowState& row = s.rows[victim];
        row.disturbance += p.blast_weights[d - 1] * pw;
        if (!crosses(row.disturbance, row.acmin_current))
            return;
        BitflipEvent ev;
        ev.victim = s.geometry.address(victim);
        ev.bit_positions = pick_bits(s.geometry.columns_per_row, p.flips_per_event, s.disturbance_rng);
        ev.cycle = now;
        ev.cause = cause;
        for (auto j : ev.bit_positions)
            row.data.flip(j);
        row.disturbance = 0.0;
        out.push_back(std::move(ev));
    });
    s.events.insert(s.events.end(), out.begin(), out.end());
    return out;
}

} // namespace memcentric::disturbance
