#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "memcentric/disturbance/measure.hpp"
#include "memcentric/harness/config.hpp"
#include "memcentric/mitigation/refresh.hpp"

namespace memcentric::harness {

// The activation sequence of one refresh window, repeated `windows` times
// with a REF round between windows.
struct AttackPlan {
    AttackPattern pattern = AttackPattern::single;
    std::vector<RowAddress> aggressors;
    std::vector<RowAddress> window; // ACT order inside one window
    std::uint64_t windows = 1;
    Cycle hold_cycles = 0;
    bool refresh = true;

    // Declared activations per aggressor per window.
    std::map<RowAddress, std::uint64_t> declared_counts() const {
        std::map<RowAddress, std::uint64_t> m;
        for (const auto& a : window)
            ++m[a];
        return m;
    }
};

inline AttackPlan generate_attack(const AttackConfig& cfg, const DramGeometry& g) {
    g.check(cfg.aggressor);
    AttackPlan p;
    p.pattern = cfg.pattern;
    p.windows = cfg.windows;
    p.hold_cycles = cfg.hold_cycles;
    p.refresh = cfg.refresh;
    std::uint32_t count = 1, step = 1;
    switch (cfg.pattern) {
    case AttackPattern::single: break;
    case AttackPattern::double_sided: count = 2, step = 2; break;
    case AttackPattern::many_sided: count = cfg.aggressors, step = cfg.spacing; break;
    }
    for (std::uint32_t k = 0; k < count; ++k) {
        RowAddress a = cfg.aggressor;
        const std::uint64_t row = std::uint64_t{a.row} + std::uint64_t{k} * step;
        if (row >= g.rows_per_subarray)
            throw ConfigError("attack: aggressor " + std::to_string(k) + " at row " + std::to_string(row) +
                              " falls outside the subarray (" + std::to_string(g.rows_per_subarray) + " rows)");
        a.row = static_cast<std::uint32_t>(row);
        p.aggressors.push_back(a);
    }
    // Round-robin over the aggressors, activations_per_aggressor rounds.
    for (std::uint64_t r = 0; r < cfg.activations_per_aggressor; ++r)
        p.window.insert(p.window.end(), p.aggressors.begin(), p.aggressors.end());
    return p;
}

struct AttackResult {
    std::uint64_t activations = 0;
    std::uint64_t windows_run = 0;
    std::optional<std::uint64_t> first_flip_activation;
    std::optional<Cycle> first_flip_cycle;
    std::uint64_t bitflips = 0;
    std::uint64_t flipped_victims = 0;
    bool audit_ok = true;
    Cycle total_cycles = 0;
};

// Executes the plan.  Rejected activations (ALERT back-off) are re-issued,
// so every window executes exactly its declared activations; the per-window
// executed counts are audited against the plan.
inline AttackResult run_attack(Device& dev, const AttackPlan& plan, bool stop_at_first_flip = false) {
    AttackResult res;
    const auto& g = dev.geometry();
    const auto declared = plan.declared_counts();
    const Cycle hold = std::max(plan.hold_cycles, dev.timing().tRAS);
    const std::size_t events_before = dev.events().size();
    auto& s = dev.mutable_state();
    const std::uint32_t ch = plan.aggressors.front().channel;

    for (std::uint64_t w = 0; w < plan.windows; ++w) {
        std::map<RowAddress, std::uint64_t> executed;
        for (const auto& a : plan.window) {
            disturbance::issue_until_executed(dev, Command::act(a, dev.now(ch)));
            ++executed[a];
            ++res.activations;
            const Cycle opened = s.banks[g.bank_index(a)].open_since;
            disturbance::issue_until_executed(dev, Command::pre(a, opened + hold));
            if (!res.first_flip_activation && dev.events().size() > events_before) {
                res.first_flip_activation = res.activations;
                res.first_flip_cycle = dev.events()[events_before].cycle;
                if (stop_at_first_flip)
                    break;
            }
        }
        ++res.windows_run;
        if (stop_at_first_flip && res.first_flip_activation)
            break;
        if (executed != declared)
            res.audit_ok = false;
        if (plan.refresh)
            mitigation::refresh_tick(dev, dev.now(ch));
    }
    std::set<RowAddress> victims;
    for (std::size_t i = events_before; i < dev.events().size(); ++i) {
        res.bitflips += dev.events()[i].bit_positions.size();
        victims.insert(dev.events()[i].victim);
    }
    res.flipped_victims = victims.size();
    res.total_cycles = dev.now(ch);
    return res;
}

} // namespace memcentric::harness
