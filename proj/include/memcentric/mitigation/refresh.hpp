#pragma once

#include <vector>

#include "memcentric/dram/device.hpp"

namespace memcentric::mitigation {

// Issues cmd, waiting out ALERT back-off until it executes.
inline Response issue_through_alert(Device& dev, Command cmd) {
    for (;;) {
        Response r = dev.issue(cmd);
        if (r.executed)
            return r;
        if (r.kind != ResponseKind::ALERT)
            return r;
        cmd.issue_cycle = r.retry_at;
    }
}

// One tREFI tick of the periodic refresh scheduler: every rank gets one
// all-bank REF covering the next row group of the rotation.  Open banks are
// precharged first.  With refs = tREFW / tREFI and groups of
// ceil(rows_per_bank / refs) rows, every row is refreshed once per tREFW.
inline std::vector<Command> refresh_tick(Device& dev, Cycle cycle) {
    std::vector<Command> issued;
    const auto& g = dev.geometry();
    for (std::uint32_t ch = 0; ch < g.channels; ++ch)
        for (std::uint32_t ra = 0; ra < g.ranks_per_channel; ++ra) {
            for (std::uint32_t ba = 0; ba < g.banks_per_rank; ++ba) {
                const RowAddress a{ch, ra, ba, 0, 0};
                if (dev.bank_open(a)) {
                    issued.push_back(Command::pre(a, cycle));
                    issue_through_alert(dev, issued.back());
                }
            }
            issued.push_back(Command::ref({ch, ra, 0, 0, 0}, cycle));
            issue_through_alert(dev, issued.back());
        }
    return issued;
}

// Drives refresh_tick at every tREFI boundary passed by the channel clock.
class RefreshScheduler {
  public:
    explicit RefreshScheduler(const TimingParams& t, bool enabled = true)
        : interval_(t.tREFI), next_(t.tREFI), enabled_(enabled) {}

    bool enabled() const { return enabled_; }
    Cycle next_due() const { return next_; }

    // Issues every tick that is due at the device's current time.
    std::size_t catch_up(Device& dev) {
        if (!enabled_)
            return 0;
        std::size_t n = 0;
        while (dev.now() >= next_) {
            refresh_tick(dev, next_);
            next_ += interval_;
            ++n;
        }
        return n;
    }

  private:
    Cycle interval_;
    Cycle next_;
    bool enabled_;
};

} // namespace memcentric::mitigation
