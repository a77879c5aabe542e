#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>

#include "memcentric/disturbance/hooks.hpp"
#include "memcentric/dram/state.hpp"
#include "memcentric/mitigation/hooks.hpp"
#include "memcentric/smd/hooks.hpp"

namespace memcentric {

// Command-level DRAM device.  Commands on a channel are serialized: each
// one starts at max(issue_cycle, channel clock, timing constraint) and the
// channel clock moves to its completion.  Timing constraints (tRAS before
// PRE) are met by stalling, never by rejecting.
class Device {
  public:
    Device(const DramGeometry& geometry, const TimingParams& timing, std::uint64_t seed,
           const DeviceOptions& options = {}) {
        geometry.validate();
        timing.validate();
        options.validate();
        auto& s = state_;
        s.geometry = geometry;
        s.timing = timing;
        s.seed = seed;
        s.options = options;
        s.disturbance_rng = make_stream(seed, StreamId::disturbance);
        s.mitigation_rng = make_stream(seed, StreamId::mitigation);
        s.pud_rng = make_stream(seed, StreamId::pud);
        s.rows.resize(geometry.total_rows());
        for (auto& r : s.rows) {
            r.data = BitRow(geometry.columns_per_row);
            if (options.disturbance.enabled) {
                r.acmin_base = disturbance::sample_acmin(options.disturbance, s.disturbance_rng);
                disturbance::resample_vrd(r, options.disturbance, s.disturbance_rng);
            }
        }
        s.banks.resize(geometry.total_banks());
        s.channel_now.assign(geometry.channels, 0);
        const auto ranks = geometry.channels * geometry.ranks_per_channel;
        s.refresh_cursor.assign(ranks, 0);
        s.mitigation.alerts.resize(ranks);
        s.mitigation.samplers.resize(geometry.total_banks());
    }

    const DeviceState& state() const { return state_; }
    // Fixture access: bypasses every protocol check.
    DeviceState& mutable_state() { return state_; }

    const DramGeometry& geometry() const { return state_.geometry; }
    const TimingParams& timing() const { return state_.timing; }

    Cycle now(std::uint32_t channel = 0) const { return state_.channel_now.at(channel); }

    const std::vector<disturbance::BitflipEvent>& events() const { return state_.events; }

    const RowState& row_state(const RowAddress& a) const {
        state_.geometry.check(a);
        return state_.rows[state_.geometry.flat(a)];
    }

    bool is_open(const RowAddress& a) const {
        const auto& g = state_.geometry;
        g.check(a);
        const auto& b = state_.banks[g.bank_index(a)];
        return b.open_row && *b.open_row == g.bank_row(a);
    }

    bool bank_open(const RowAddress& a) const {
        state_.geometry.check(a);
        return state_.banks[state_.geometry.bank_index(a)].open_row.has_value();
    }

    const BitRow& peek_row(const RowAddress& a) const { return row_state(a).data; }

    void poke_row(const RowAddress& a, const BitRow& bits) {
        const auto& g = state_.geometry;
        g.check(a);
        if (bits.size() != g.columns_per_row)
            throw CapacityError("poke_row: expected " + std::to_string(g.columns_per_row) + " bits");
        const RowIndex idx = g.flat(a);
        state_.rows[idx].data = bits;
        if (state_.options.smd.track_reference)
            state_.smd.reference[idx] = bits;
    }

    // Fixture helper: pins a row's threshold.
    void set_acmin(const RowAddress& a, double base, std::optional<double> current = std::nullopt) {
        state_.geometry.check(a);
        auto& r = state_.rows[state_.geometry.flat(a)];
        r.acmin_base = base;
        r.acmin_current = current.value_or(base);
    }

    // Records the current contents of every row as the scrub reference.
    void snapshot_reference() {
        for (RowIndex i = 0; i < state_.rows.size(); ++i)
            state_.smd.reference[i] = state_.rows[i].data;
    }

    bool alert_asserted(const RowAddress& a) const {
        return state_.mitigation.alerts[state_.geometry.rank_index(a)].asserted;
    }

    // Runs chip-side background activity (PRAC recovery, SMD maintenance)
    // up to `cycle` on the channel and moves the channel clock there.
    void advance(std::uint32_t channel, Cycle cycle) {
        settle(cycle);
        auto& now = state_.channel_now.at(channel);
        now = std::max(now, cycle);
    }

    Response issue(const Command& cmd) {
        auto& s = state_;
        const auto& g = s.geometry;
        const auto& t = s.timing;
        g.check(cmd.addr);
        if (cmd.payload && cmd.kind != CommandKind::WR)
            throw ProtocolError(std::string("payload on ") + to_string(cmd.kind));
        Cycle& now = s.channel_now[cmd.addr.channel];
        Cycle start = std::max(cmd.issue_cycle, now);
        settle(start);

        const auto& alert = s.mitigation.alerts[g.rank_index(cmd.addr)];
        if (alert.asserted) {
            ++s.mitigation.stats.alert_rejections;
            return reject(now, start, ResponseKind::ALERT, alert.release_cycle, std::nullopt);
        }

        BankState& bank = s.banks[g.bank_index(cmd.addr)];
        const RowIndex idx = g.flat(cmd.addr);
        const std::uint32_t local = g.bank_row(cmd.addr);
        Response resp;

        switch (cmd.kind) {
        case CommandKind::ACT: {
            if (auto region = smd::smd_filter(s, cmd)) {
                ++s.smd.stats.nacks;
                const auto* lock = s.smd.locks.find(cmd.addr);
                return reject(now, start, ResponseKind::NACK, lock->release_cycle, region);
            }
            if (bank.open_row) {
                if (*bank.open_row != local)
                    throw ProtocolError("ACT " + to_string(cmd.addr) + ": bank already has row " +
                                        std::to_string(*bank.open_row) + " open");
                resp.completion_cycle = start + 1;
                break;
            }
            bank.open_row = local;
            bank.open_since = start;
            resp.completion_cycle = start + t.tRCD;
            mitigation::para_on_activate(s, idx, start);
            mitigation::trr_on_activate(s, g.bank_index(cmd.addr), idx);
            break;
        }
        case CommandKind::PRE: {
            if (!bank.open_row) {
                resp.completion_cycle = start + 1;
                break;
            }
            start = std::max(start, bank.open_since + t.tRAS);
            const Cycle open_cycles = start - bank.open_since;
            const RowIndex open_idx = g.bank_index(cmd.addr) * g.rows_per_bank() + *bank.open_row;
            bank.open_row.reset();
            resp.completion_cycle = start + t.tRP;
            bank.closed_at = resp.completion_cycle;
            ++s.rows[open_idx].act_counter;
            disturbance::on_aggressor_precharge(s, open_idx, open_cycles, start);
            smd::on_precharge(s, open_idx);
            if (mitigation::prac_on_precharge(s, open_idx, resp.completion_cycle)) {
                resp.kind = ResponseKind::ALERT;
                resp.retry_at = s.mitigation.alerts[g.rank_index(cmd.addr)].release_cycle;
            }
            break;
        }
        case CommandKind::RD:
        case CommandKind::WR: {
            if (!bank.open_row || *bank.open_row != local)
                throw ProtocolError(std::string(to_string(cmd.kind)) + " " + to_string(cmd.addr) + ": row not open");
            start = std::max(start, bank.open_since + t.tRCD);
            resp.completion_cycle = start + t.tBURST;
            if (cmd.kind == CommandKind::RD) {
                resp.kind = ResponseKind::DATA;
                resp.data = s.rows[idx].data;
            } else {
                if (!cmd.payload)
                    throw ProtocolError("WR " + to_string(cmd.addr) + " without payload");
                if (cmd.payload->size() != g.columns_per_row)
                    throw ProtocolError("WR payload of " + std::to_string(cmd.payload->size()) + " bits, row has " +
                                        std::to_string(g.columns_per_row));
                if (s.options.smd.enabled && s.smd.locks.find(cmd.addr))
                    throw InvariantViolation("host write to " + to_string(cmd.addr) + " inside a locked region");
                s.rows[idx].data = *cmd.payload;
                if (s.options.smd.track_reference)
                    s.smd.reference[idx] = *cmd.payload;
            }
            break;
        }
        case CommandKind::REF: {
            refresh_rank(cmd.addr, start);
            resp.completion_cycle = start + t.tRFC;
            break;
        }
        }
        ++s.stats.commands[static_cast<std::size_t>(cmd.kind)];
        now = resp.completion_cycle;
        return resp;
    }

    // Reserves the subarray's bank for an in-array operation of `duration`
    // cycles starting no earlier than the channel clock.  Returns the start.
    Cycle reserve_subarray(const RowAddress& sub, Cycle duration) {
        auto& s = state_;
        const auto& g = s.geometry;
        g.check(sub);
        Cycle& now = s.channel_now[sub.channel];
        settle(now);
        if (s.mitigation.alerts[g.rank_index(sub)].asserted)
            advance(sub.channel, s.mitigation.alerts[g.rank_index(sub)].release_cycle);
        if (s.banks[g.bank_index(sub)].open_row)
            throw ProtocolError("in-array operation on " + to_string(sub) + " while its bank has an open row");
        if (s.options.smd.enabled)
            if (const auto* lock = s.smd.locks.find(sub))
                throw ProtocolError("in-array operation on " + to_string(sub) + ": region " +
                                    to_string(lock->region) + " under maintenance");
        const Cycle start = now;
        now += duration;
        ++s.stats.pud_ops;
        return start;
    }

  private:
    void settle(Cycle cycle) {
        mitigation::prac_service(state_, cycle);
        smd::smd_service(state_, cycle);
    }

    Response reject(Cycle& now, Cycle start, ResponseKind kind, Cycle retry_at, std::optional<Region> region) {
        Response r;
        r.kind = kind;
        r.completion_cycle = start + 1;
        r.retry_at = retry_at;
        r.region = region;
        r.executed = false;
        now = r.completion_cycle;
        ++state_.stats.rejected;
        return r;
    }

    // All-bank REF: refreshes the next group of bank-local rows in every bank
    // of the rank.  Every bank must be precharged.
    void refresh_rank(const RowAddress& a, Cycle start) {
        auto& s = state_;
        const auto& g = s.geometry;
        const auto rank = g.rank_index(a);
        for (std::uint32_t ba = 0; ba < g.banks_per_rank; ++ba)
            if (s.banks[g.bank_index({a.channel, a.rank, ba, 0, 0})].open_row)
                throw ProtocolError("REF to rank with open bank " + std::to_string(ba));
        const std::uint32_t group = s.refresh_group_rows();
        std::uint32_t& cursor = s.refresh_cursor[rank];
        for (std::uint32_t ba = 0; ba < g.banks_per_rank; ++ba) {
            const RowIndex base = g.bank_index({a.channel, a.rank, ba, 0, 0}) * g.rows_per_bank();
            for (std::uint32_t k = 0; k < group; ++k)
                refresh_row(s, base + (cursor + k) % g.rows_per_bank(), start);
            mitigation::trr_on_refresh(s, g.bank_index({a.channel, a.rank, ba, 0, 0}), start);
        }
        cursor = (cursor + group) % g.rows_per_bank();
    }

    DeviceState state_;
};

inline Device new_device(const DramGeometry& geometry, const TimingParams& timing, std::uint64_t seed,
                         const DeviceOptions& options = {}) {
    return Device(geometry, timing, seed, options);
}

} // namespace memcentric
