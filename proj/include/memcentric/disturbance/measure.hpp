#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "memcentric/dram/device.hpp"
#include "memcentric/mitigation/refresh.hpp"

namespace memcentric::disturbance {

enum class Sidedness { single, double_sided };

// How measure_acmin hammers.  Double-sided hammering alternates between
// `aggressor` and the row two above it, sandwiching one victim.
struct AccessPattern {
    Sidedness sides = Sidedness::single;
    Cycle hold_cycles = 0;              // row open time per activation; 0 means tRAS
    std::uint64_t cap = 1'000'000;      // give up after this many aggressor activations
    bool periodic_refresh = false;      // interleave REF every tREFI
};

// Issues `cmd`, re-issuing it at the device's suggested retry cycle while it
// is rejected (NACK or ALERT).
inline Response issue_until_executed(Device& dev, Command cmd) {
    for (;;) {
        Response r = dev.issue(cmd);
        if (r.executed)
            return r;
        cmd.issue_cycle = r.retry_at;
    }
}

inline std::vector<RowAddress> pattern_aggressors(const Device& dev, const RowAddress& aggressor,
                                                  const AccessPattern& pattern) {
    dev.geometry().check(aggressor);
    std::vector<RowAddress> out{aggressor};
    if (pattern.sides == Sidedness::double_sided) {
        RowAddress second = aggressor;
        second.row += 2;
        if (second.row >= dev.geometry().rows_per_subarray)
            throw AddressError("double-sided pattern needs row " + std::to_string(second.row) +
                               " inside the subarray of " + to_string(aggressor));
        out.push_back(second);
    }
    return out;
}

// Hammers until the first bitflip in the aggressors' neighborhood and returns
// the number of aggressor activations it took, or nullopt when `cap` is
// reached first.  The neighborhood is refreshed before the run, which opens
// a new window (and a new VRD draw), and its data and accumulators are
// restored afterwards.
inline std::optional<std::uint64_t> measure_acmin(Device& dev, const RowAddress& aggressor,
                                                  const AccessPattern& pattern = {}) {
    const auto aggressors = pattern_aggressors(dev, aggressor, pattern);
    const auto& g = dev.geometry();
    const auto& t = dev.timing();
    auto& s = dev.mutable_state();

    std::set<RowIndex> hood;
    for (const auto& a : aggressors)
        s.for_each_neighbor(g.flat(a), 2, [&](RowIndex v, std::uint32_t) { hood.insert(v); });
    std::vector<std::pair<RowIndex, BitRow>> saved;
    for (RowIndex v : hood) {
        saved.emplace_back(v, s.rows[v].data);
        refresh_row(s, v, dev.now(aggressor.channel));
    }

    const Cycle hold = std::max(pattern.hold_cycles, t.tRAS);
    Cycle next_ref = dev.now(aggressor.channel) + t.tREFI;
    const std::size_t events_before = dev.events().size();
    std::optional<std::uint64_t> result;

    for (std::uint64_t n = 1; n <= pattern.cap; ++n) {
        const RowAddress& a = aggressors[(n - 1) % aggressors.size()];
        if (pattern.periodic_refresh && dev.now(a.channel) >= next_ref) {
            mitigation::refresh_tick(dev, dev.now(a.channel));
            next_ref = dev.now(a.channel) + t.tREFI;
        }
        issue_until_executed(dev, Command::act(a, dev.now(a.channel)));
        const Cycle opened = s.banks[g.bank_index(a)].open_since;
        issue_until_executed(dev, Command::pre(a, opened + hold));
        if (dev.events().size() > events_before) {
            result = n;
            break;
        }
    }

    for (auto& [v, bits] : saved) {
        s.rows[v].data = std::move(bits);
        s.rows[v].disturbance = 0.0;
    }
    return result;
}

} // namespace memcentric::disturbance
