#pragma once

#include <bit>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "memcentric/dram/device.hpp"
#include "memcentric/mitigation/refresh.hpp"

namespace memcentric::smd {

// Power-of-two latency buckets: key b counts samples in [b, 2b), key 0
// counts zero-latency samples.
class LatencyHistogram {
  public:
    void add(Cycle v) { ++buckets_[v == 0 ? 0 : std::bit_floor(v)]; }

    std::uint64_t total() const {
        std::uint64_t n = 0;
        for (const auto& [k, c] : buckets_)
            n += c;
        return n;
    }

    const std::map<Cycle, std::uint64_t>& buckets() const { return buckets_; }

    friend bool operator==(const LatencyHistogram&, const LatencyHistogram&) = default;

  private:
    std::map<Cycle, std::uint64_t> buckets_;
};

struct RetryPolicy {
    Cycle backoff = 20;
    std::uint32_t max_retries = 10'000;
};

// Per-command retry bookkeeping.
struct RetryState {
    std::uint32_t retries = 0;
    Cycle first_nack = 0;
};

// Requeues a NACKed command one fixed backoff after the rejection.  Throws
// SchedulingError once the retry cap is exceeded, which points at a lock that
// never releases or a maintenance duration sized larger than the cap allows.
inline Command mc_retry(RetryState& st, const Command& cmd, const Response& nack, const RetryPolicy& policy) {
    if (nack.kind != ResponseKind::NACK)
        throw ProtocolError("mc_retry called with a " + std::string(to_string(nack.kind)) + " response");
    const Cycle rejected_at = nack.completion_cycle - 1;
    if (st.retries == 0)
        st.first_nack = rejected_at;
    if (++st.retries > policy.max_retries)
        throw SchedulingError("starvation: " + std::string(to_string(cmd.kind)) + " " + to_string(cmd.addr) +
                              " rejected " + std::to_string(st.retries) + " times since cycle " +
                              std::to_string(st.first_nack) + (nack.region ? " by region " + to_string(*nack.region) : "") +
                              "; maintenance duration exceeds the retry budget");
    Command next = cmd;
    next.issue_cycle = rejected_at + policy.backoff;
    return next;
}

// A host access served with a closed-page policy: ACT, RD or WR, PRE.
struct Request {
    CommandKind kind = CommandKind::RD; // RD or WR
    RowAddress addr;
    std::optional<BitRow> payload;
    Cycle arrival = 0;
};

struct RequestResult {
    Cycle start = 0;
    Cycle completion = 0;
    std::uint32_t retries = 0;
    Cycle retry_latency = 0; // cycles from the first NACK to completion
    std::optional<BitRow> data;
};

struct ControllerStats {
    std::uint64_t requests = 0;
    std::uint64_t nacks = 0;
    std::uint64_t retries = 0;
    std::uint64_t alert_waits = 0;
    std::uint64_t refresh_ticks = 0;
    Cycle retry_latency = 0;
    LatencyHistogram latency;       // arrival to completion, per request
    LatencyHistogram retry_latency_hist; // per request that was NACKed at least once
};

// Host memory controller for one device.  Periodic REF is issued by the
// controller only when the device does not manage its own refresh.
class MemoryController {
  public:
    explicit MemoryController(Device& dev, RetryPolicy policy = {}, bool host_refresh = true)
        : dev_(dev), policy_(policy),
          refresh_(dev.timing(), host_refresh && !dev.state().options.smd.enabled) {
        policy_.backoff = policy.backoff ? policy.backoff : dev.timing().nack_retry_backoff;
    }

    const ControllerStats& stats() const { return stats_; }
    Device& device() { return dev_; }

    // Serves one request to completion in order, retrying NACKs in place.
    RequestResult serve(const Request& req) {
        RequestResult res;
        res.start = std::max(req.arrival, dev_.now(req.addr.channel));
        RetryState rs;
        Command act = Command::act(req.addr, res.start);
        for (;;) {
            tick_refresh(req.addr.channel);
            act.issue_cycle = std::max(act.issue_cycle, dev_.now(req.addr.channel));
            Response r = dev_.issue(act);
            if (r.executed)
                break;
            if (r.kind == ResponseKind::NACK) {
                ++stats_.nacks;
                act = mc_retry(rs, act, r, policy_);
            } else {
                ++stats_.alert_waits;
                act.issue_cycle = r.retry_at;
            }
        }
        finish(req, rs, res);
        return res;
    }

    // Serves a batch, steering around regions under maintenance: a request
    // is eligible once it is the oldest pending one for its subarray and that
    // subarray is not waiting out a NACK backoff.  Same-subarray order (and
    // therefore same-row order) is preserved.
    std::vector<RequestResult> run(const std::vector<Request>& reqs) {
        std::vector<RequestResult> out(reqs.size());
        std::vector<RetryState> rs(reqs.size());
        std::map<std::uint64_t, std::deque<std::size_t>> fifo; // subarray key -> request indices
        std::map<std::uint64_t, Cycle> blocked_until;
        const auto& g = dev_.geometry();
        auto key = [&](const RowAddress& a) {
            return std::uint64_t{g.bank_index(a)} * g.subarrays_per_bank + a.subarray;
        };
        for (std::size_t i = 0; i < reqs.size(); ++i)
            fifo[key(reqs[i].addr)].push_back(i);
        std::vector<bool> started(reqs.size(), false);

        const std::uint32_t ch = reqs.empty() ? 0 : reqs.front().addr.channel;
        for (const auto& r : reqs)
            if (r.addr.channel != ch)
                throw ConfigError("MemoryController::run drives a single channel per batch");

        std::size_t remaining = reqs.size();
        while (remaining) {
            const Cycle now = dev_.now(ch);
            std::optional<std::size_t> pick;
            Cycle wake = ~Cycle{0};
            for (auto& [k, q] : fifo) {
                if (q.empty())
                    continue;
                const std::size_t i = q.front();
                const Cycle ready = std::max(reqs[i].arrival, blocked_until[k]);
                if (ready <= now) {
                    if (!pick || i < *pick)
                        pick = i;
                } else {
                    wake = std::min(wake, ready);
                }
            }
            if (!pick) {
                dev_.advance(ch, wake);
                continue;
            }
            const std::size_t i = *pick;
            const Request& req = reqs[i];
            if (!started[i]) {
                out[i].start = std::max(req.arrival, dev_.now(req.addr.channel));
                started[i] = true;
            }
            tick_refresh(req.addr.channel);
            Response r = dev_.issue(Command::act(req.addr, dev_.now(req.addr.channel)));
            if (!r.executed) {
                if (r.kind == ResponseKind::NACK) {
                    ++stats_.nacks;
                    const Command next = mc_retry(rs[i], Command::act(req.addr), r, policy_);
                    blocked_until[key(req.addr)] = next.issue_cycle;
                } else {
                    ++stats_.alert_waits;
                    dev_.advance(req.addr.channel, r.retry_at);
                }
                continue;
            }
            finish(req, rs[i], out[i]);
            fifo[key(req.addr)].pop_front();
            --remaining;
        }
        return out;
    }

    // Lets the clock run to `cycle` with periodic refresh, without requests.
    void idle_until(std::uint32_t channel, Cycle cycle) {
        while (refresh_.enabled() && refresh_.next_due() <= cycle) {
            dev_.advance(channel, refresh_.next_due());
            tick_refresh(channel);
        }
        dev_.advance(channel, cycle);
    }

  private:
    void tick_refresh(std::uint32_t) { stats_.refresh_ticks += refresh_.catch_up(dev_); }

    // ACT accepted: column access, then precharge.
    void finish(const Request& req, const RetryState& rs, RequestResult& res) {
        const auto ch = req.addr.channel;
        if (req.kind == CommandKind::WR && !req.payload)
            throw ProtocolError("write request to " + to_string(req.addr) + " without payload");
        if (req.kind != CommandKind::WR && req.kind != CommandKind::RD)
            throw ProtocolError("host requests are RD or WR");
        Command col = req.kind == CommandKind::WR ? Command::wr(req.addr, *req.payload, dev_.now(ch))
                                                  : Command::rd(req.addr, dev_.now(ch));
        Response cr = dev_.issue(col);
        if (!cr.executed)
            throw InvariantViolation("column command rejected after its row was opened");
        res.data = std::move(cr.data);
        Response pr = dev_.issue(Command::pre(req.addr, dev_.now(ch)));
        if (!pr.executed)
            throw InvariantViolation("precharge rejected after its row was opened");
        res.completion = pr.completion_cycle;
        res.retries = rs.retries;
        res.retry_latency = rs.retries ? res.completion - rs.first_nack : 0;
        ++stats_.requests;
        stats_.retries += rs.retries;
        stats_.retry_latency += res.retry_latency;
        stats_.latency.add(res.completion - req.arrival);
        if (rs.retries)
            stats_.retry_latency_hist.add(res.retry_latency);
    }

    Device& dev_;
    RetryPolicy policy_;
    mitigation::RefreshScheduler refresh_;
    ControllerStats stats_;
};

} // namespace memcentric::smd
