#pragma once

#include <climits>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "memcentric/harness/attack.hpp"
#include "memcentric/harness/config.hpp"
#include "memcentric/harness/metrics.hpp"
#include "memcentric/harness/trace.hpp"
#include "memcentric/pnm/model.hpp"
#include "memcentric/pud/compiler.hpp"
#include "memcentric/pud/trng.hpp"
#include "memcentric/smd/controller.hpp"

namespace memcentric::harness {

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> c = {"simulate", "attack", "pud", "trng", "pnm", "sweep"};
    return c;
}

inline Device make_device(const ExperimentConfig& c) { return Device(c.geometry, c.timing, c.seed, c.device); }

// --seed on the command line replaces the configured seed, including for
// every point of a sweep.
inline void override_seed(ExperimentConfig& c, std::uint64_t seed) {
    c.seed = seed;
    c.raw["seed"] = seed;
}

namespace detail {

// Latency histogram columns: lat_0 counts zero-cycle samples, lat_B counts
// samples in [B, 2B), and the last column collects everything from 65536 up.
inline constexpr Cycle kLatencyCap = 65536;

inline std::vector<std::string> latency_columns() {
    std::vector<std::string> c = {"lat_0"};
    for (Cycle b = 1; b <= kLatencyCap; b *= 2)
        c.push_back("lat_" + std::to_string(b));
    return c;
}

inline void put_histogram(std::map<std::string, Value>& row, const smd::LatencyHistogram& h) {
    for (const auto& c : latency_columns())
        row[c] = std::int64_t{0};
    for (const auto& [b, n] : h.buckets()) {
        const Cycle key = std::min(b, kLatencyCap);
        auto& cell = std::get<std::int64_t>(row["lat_" + std::to_string(key)]);
        cell += static_cast<std::int64_t>(n);
    }
}

inline std::int64_t i64(std::uint64_t v) {
    if (v > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
        throw InvariantViolation("metric value " + std::to_string(v) + " exceeds the int64 range");
    return static_cast<std::int64_t>(v);
}

inline Value unsigned_value(std::uint64_t v) {
    if (v > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
        return std::to_string(v);
    return static_cast<std::int64_t>(v);
}

inline void put_device_stats(std::map<std::string, Value>& row, const Device& dev, std::size_t events_from = 0) {
    const auto& s = dev.state();
    const auto& st = s.stats;
    row["act"] = i64(st.commands[static_cast<std::size_t>(CommandKind::ACT)]);
    row["pre"] = i64(st.commands[static_cast<std::size_t>(CommandKind::PRE)]);
    row["rd"] = i64(st.commands[static_cast<std::size_t>(CommandKind::RD)]);
    row["wr"] = i64(st.commands[static_cast<std::size_t>(CommandKind::WR)]);
    row["ref"] = i64(st.commands[static_cast<std::size_t>(CommandKind::REF)]);
    row["rejected"] = i64(st.rejected);
    row["refreshed_rows"] = i64(st.refreshed_rows);
    const auto& m = s.mitigation.stats;
    row["alerts"] = i64(m.alerts);
    row["alert_rejections"] = i64(m.alert_rejections);
    row["para_refreshes"] = i64(m.para_refreshes);
    row["trr_refreshes"] = i64(m.trr_refreshes);
    row["prac_recoveries"] = i64(m.prac_recoveries);
    row["victim_refreshes"] = i64(m.victim_refreshes);
    std::uint64_t bits = 0, hammer = 0, press = 0;
    std::set<RowAddress> victims;
    for (std::size_t i = events_from; i < s.events.size(); ++i) {
        const auto& e = s.events[i];
        bits += e.bit_positions.size();
        (e.cause == disturbance::FlipCause::rowhammer ? hammer : press) += 1;
        victims.insert(e.victim);
    }
    row["bitflips"] = i64(bits);
    row["flip_events_rowhammer"] = i64(hammer);
    row["flip_events_rowpress"] = i64(press);
    row["flipped_victims"] = i64(victims.size());
}

inline std::vector<std::string> device_stat_columns() {
    return {"act",        "pre",        "rd",           "wr",         "ref",
            "rejected",   "refreshed_rows", "alerts",   "alert_rejections", "para_refreshes",
            "trr_refreshes", "prac_recoveries", "victim_refreshes", "bitflips", "flip_events_rowhammer",
            "flip_events_rowpress", "flipped_victims"};
}

inline std::vector<std::string> smd_columns() {
    return {"smd_nacks", "smd_tasks", "smd_refresh_tasks", "smd_rh_tasks", "smd_scrub_tasks", "scrub_detections",
            "scrub_corrections"};
}

inline void put_smd_stats(std::map<std::string, Value>& row, const Device& dev) {
    const auto& s = dev.state().smd.stats;
    row["smd_nacks"] = i64(s.nacks);
    row["smd_tasks"] = i64(s.tasks_begun);
    row["smd_refresh_tasks"] = i64(s.refresh_tasks);
    row["smd_rh_tasks"] = i64(s.rh_tasks);
    row["smd_scrub_tasks"] = i64(s.scrub_tasks);
    row["scrub_detections"] = i64(s.scrub_detections);
    row["scrub_corrections"] = i64(s.scrub_corrections);
}

template <class... Lists>
std::vector<std::string> concat(std::vector<std::string> a, const Lists&... rest) {
    (a.insert(a.end(), rest.begin(), rest.end()), ...);
    return a;
}

inline bool any_bank_open(const Device& dev) {
    for (const auto& b : dev.state().banks)
        if (b.open_row)
            return true;
    return false;
}

} // namespace detail

inline std::vector<std::string> simulate_columns() {
    return detail::concat(std::vector<std::string>{"source", "requests", "commands", "total_cycles", "nacks",
                                                   "retries", "retry_latency", "alert_waits", "host_refresh_ticks"},
                          detail::device_stat_columns(), detail::smd_columns(),
                          std::vector<std::string>{"divergent_rows", "read_mismatches"}, detail::latency_columns());
}

// Trace replay.  Each record is issued at its cycle or when the channel is
// free, whichever is later; NACKs are retried with the controller policy and
// ALERT back-off is waited out.  Host refresh ticks are issued when due and
// no bank is open, so they never interrupt a trace's own row cycles.
inline MetricsReport simulate_trace(const ExperimentConfig& c) {
    MetricsReport rep{"simulate", Table(simulate_columns()), {}, {}};
    const auto records = parse_trace_file(c.workload->trace->string());
    if (records.empty()) {
        rep.notes.push_back("empty trace: nothing simulated");
        return rep;
    }
    Device dev = make_device(c);
    const auto& g = dev.geometry();
    const smd::RetryPolicy policy{c.controller.retry_backoff ? c.controller.retry_backoff : c.timing.nack_retry_backoff,
                                  c.controller.max_retries};
    const bool host_refresh = c.workload->host_refresh && !c.device.smd.enabled;
    Cycle next_ref = c.timing.tREFI;
    std::uint64_t ticks = 0, nacks = 0, retries = 0, alert_waits = 0;
    Cycle retry_latency = 0;
    smd::LatencyHistogram hist;
    for (const auto& rec : records) {
        Command cmd = to_command(rec, g);
        while (host_refresh && next_ref <= rec.cycle && !detail::any_bank_open(dev)) {
            mitigation::refresh_tick(dev, next_ref);
            next_ref += c.timing.tREFI;
            ++ticks;
        }
        smd::RetryState rs;
        Response r;
        for (;;) {
            cmd.issue_cycle = std::max(cmd.issue_cycle, dev.now(cmd.addr.channel));
            try {
                r = dev.issue(cmd);
            } catch (const ProtocolError& e) {
                throw ProtocolError("trace line " + std::to_string(rec.line) + ": " + e.what());
            }
            if (r.executed)
                break;
            if (r.kind == ResponseKind::NACK) {
                ++nacks;
                cmd = smd::mc_retry(rs, cmd, r, policy);
            } else {
                ++alert_waits;
                cmd.issue_cycle = r.retry_at;
            }
        }
        retries += rs.retries;
        if (rs.retries)
            retry_latency += r.completion_cycle - rs.first_nack;
        hist.add(r.completion_cycle - rec.cycle);
    }
    std::map<std::string, Value> row;
    row["source"] = std::string("trace");
    row["requests"] = std::int64_t{0};
    row["commands"] = detail::i64(records.size());
    Cycle end = 0;
    for (std::uint32_t ch = 0; ch < g.channels; ++ch)
        end = std::max(end, dev.now(ch));
    row["total_cycles"] = detail::i64(end);
    row["nacks"] = detail::i64(nacks);
    row["retries"] = detail::i64(retries);
    row["retry_latency"] = detail::i64(retry_latency);
    row["alert_waits"] = detail::i64(alert_waits);
    row["host_refresh_ticks"] = detail::i64(ticks);
    detail::put_device_stats(row, dev);
    detail::put_smd_stats(row, dev);
    detail::put_histogram(row, hist);
    rep.summary.add_row(row);
    return rep;
}

// Uniform random closed-page requests over the first `banks` banks of
// channel 0, rank 0.
inline std::vector<smd::Request> synthetic_requests(const ExperimentConfig& c, const SyntheticWorkload& w) {
    const auto& g = c.geometry;
    const std::uint32_t banks = w.banks ? w.banks : g.banks_per_rank;
    if (banks > g.banks_per_rank)
        throw ConfigError("workload.synthetic.banks (" + std::to_string(banks) + ") exceeds banks_per_rank (" +
                          std::to_string(g.banks_per_rank) + ")");
    Rng rng = make_stream(c.seed, StreamId::workload);
    std::vector<smd::Request> out;
    out.reserve(w.requests);
    for (std::uint64_t i = 0; i < w.requests; ++i) {
        smd::Request r;
        r.addr.bank = static_cast<std::uint32_t>(rng.below(banks));
        r.addr.subarray = static_cast<std::uint32_t>(rng.below(g.subarrays_per_bank));
        r.addr.row = static_cast<std::uint32_t>(rng.below(g.rows_per_subarray));
        r.arrival = i * w.arrival_gap;
        if (rng.bernoulli(w.write_fraction)) {
            r.kind = CommandKind::WR;
            BitRow p(g.columns_per_row);
            for (auto& word : p.words())
                word = rng.next();
            p &= BitRow(g.columns_per_row, true); // clears bits past the last column
            r.payload = std::move(p);
        }
        out.push_back(std::move(r));
    }
    return out;
}

inline MetricsReport simulate_synthetic(const ExperimentConfig& c) {
    MetricsReport rep{"simulate", Table(simulate_columns()), {}, {}};
    const auto& w = *c.workload->synthetic;
    const auto reqs = synthetic_requests(c, w);
    if (reqs.empty()) {
        rep.notes.push_back("no requests: nothing simulated");
        return rep;
    }
    const smd::RetryPolicy policy{c.controller.retry_backoff, c.controller.max_retries};
    Device dev = make_device(c);
    smd::MemoryController mc(dev, policy, c.workload->host_refresh);
    const auto results = mc.run(reqs);

    std::map<std::string, Value> row;
    row["source"] = std::string("synthetic");
    row["requests"] = detail::i64(reqs.size());
    std::uint64_t commands = 0;
    for (auto n : dev.state().stats.commands)
        commands += n;
    row["commands"] = detail::i64(commands);
    row["total_cycles"] = detail::i64(dev.now(0));
    const auto& st = mc.stats();
    row["nacks"] = detail::i64(st.nacks);
    row["retries"] = detail::i64(st.retries);
    row["retry_latency"] = detail::i64(st.retry_latency);
    row["alert_waits"] = detail::i64(st.alert_waits);
    row["host_refresh_ticks"] = detail::i64(st.refresh_ticks);
    detail::put_device_stats(row, dev);
    detail::put_smd_stats(row, dev);
    detail::put_histogram(row, st.latency);

    if (w.golden) {
        // Maintenance-free reference: no disturbance, mitigation, SMD or refresh.
        DeviceOptions plain;
        Device ref(c.geometry, c.timing, c.seed, plain);
        smd::MemoryController rmc(ref, policy, false);
        const auto golden = rmc.run(reqs);
        std::uint64_t divergent = 0, mismatches = 0;
        for (RowIndex i = 0; i < dev.state().rows.size(); ++i)
            divergent += dev.state().rows[i].data != ref.state().rows[i].data;
        for (std::size_t i = 0; i < reqs.size(); ++i)
            mismatches += results[i].data != golden[i].data;
        row["divergent_rows"] = detail::i64(divergent);
        row["read_mismatches"] = detail::i64(mismatches);
    }
    rep.summary.add_row(row);
    return rep;
}

inline MetricsReport simulate(const ExperimentConfig& c) {
    if (!c.workload)
        throw ConfigError("simulate needs a 'workload' section");
    return c.workload->trace ? simulate_trace(c) : simulate_synthetic(c);
}

inline MetricsReport attack(const ExperimentConfig& c) {
    if (!c.attack)
        throw ConfigError("attack needs an 'attack' section");
    const AttackPlan plan = generate_attack(*c.attack, c.geometry);
    Device dev = make_device(c);
    const AttackResult res = run_attack(dev, plan, c.attack->stop_at_first_flip);
    MetricsReport rep{"attack",
                      Table(detail::concat(std::vector<std::string>{"pattern", "mitigation", "aggressors", "windows",
                                                                    "activations", "first_flip_activation",
                                                                    "first_flip_cycle", "audit_ok", "total_cycles"},
                                           detail::device_stat_columns())),
                      Table({"aggressor", "channel", "rank", "bank", "subarray", "row", "activations_per_window"}),
                      {}};
    std::map<std::string, Value> row;
    row["pattern"] = std::string(to_string(plan.pattern));
    row["mitigation"] = c.device.mitigation.name();
    row["aggressors"] = detail::i64(plan.aggressors.size());
    row["windows"] = detail::i64(res.windows_run);
    row["activations"] = detail::i64(res.activations);
    if (res.first_flip_activation) {
        row["first_flip_activation"] = detail::i64(*res.first_flip_activation);
        row["first_flip_cycle"] = detail::i64(*res.first_flip_cycle);
    }
    row["audit_ok"] = std::int64_t{res.audit_ok};
    row["total_cycles"] = detail::i64(res.total_cycles);
    detail::put_device_stats(row, dev);
    rep.summary.add_row(row);
    const auto declared = plan.declared_counts();
    for (std::size_t k = 0; k < plan.aggressors.size(); ++k) {
        const auto& a = plan.aggressors[k];
        rep.detail.add_row({{"aggressor", detail::i64(k)},
                            {"channel", std::int64_t{a.channel}},
                            {"rank", std::int64_t{a.rank}},
                            {"bank", std::int64_t{a.bank}},
                            {"subarray", std::int64_t{a.subarray}},
                            {"row", std::int64_t{a.row}},
                            {"activations_per_window", detail::i64(declared.at(a))}});
    }
    if (!res.audit_ok)
        throw InvariantViolation("attack audit failed: executed activations differ from the plan");
    return rep;
}

// Operand file: one line per circuit input, `NAME v0 v1 ...`, one value per
// lane, decimal or 0x-prefixed hex.  `#` starts a comment.
inline std::map<std::string, std::vector<std::uint64_t>> parse_operands(std::istream& in) {
    std::map<std::string, std::vector<std::uint64_t>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos)
            line.erase(h);
        std::istringstream ss(line);
        std::string name;
        if (!(ss >> name))
            continue;
        if (out.count(name))
            throw ParseError("operand '" + name + "' given twice", lineno);
        auto& vals = out[name];
        for (std::string t; ss >> t;) {
            const bool hex = t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X');
            const std::string digits = hex ? t.substr(2) : t;
            const char* allowed = hex ? "0123456789abcdefABCDEF" : "0123456789";
            if (digits.empty() || digits.find_first_not_of(allowed) != std::string::npos)
                throw ParseError("operand value '" + t + "' is not an unsigned integer", lineno);
            try {
                vals.push_back(std::stoull(digits, nullptr, hex ? 16 : 10));
            } catch (const std::out_of_range&) {
                throw ParseError("operand value '" + t + "' exceeds 64 bits", lineno);
            }
        }
    }
    return out;
}

inline pud::GateCircuit load_netlist(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in)
        throw ConfigError("cannot read netlist '" + p.string() + "'");
    return pud::parse_netlist(in);
}

inline MetricsReport pud_run(const ExperimentConfig& c) {
    if (!c.pud)
        throw ConfigError("pud needs a 'pud' section");
    const auto& pc = *c.pud;
    const auto circuit = load_netlist(pc.netlist);
    const auto prog = pud::compile_circuit(circuit, c.geometry.rows_per_subarray);

    std::map<std::string, std::vector<std::uint64_t>> operands;
    if (pc.operands) {
        std::ifstream in(*pc.operands);
        if (!in)
            throw ConfigError("cannot read operands '" + pc.operands->string() + "'");
        operands = parse_operands(in);
    } else {
        Rng rng = make_stream(c.seed, StreamId::workload);
        for (const auto& input : circuit.inputs()) {
            const std::uint64_t mask = input.width == 64 ? ~0ull : (1ull << input.width) - 1;
            auto& v = operands[input.name];
            for (std::uint64_t i = 0; i < pc.random_operands; ++i)
                v.push_back(rng.next() & mask);
        }
    }

    Device dev = make_device(c);
    pud::PudEngine engine(dev, c.noise, pc.lanes);
    const auto got = pud::run_program(engine, prog, circuit, pc.subarray, operands);

    // Expected outputs from direct evaluation of the netlist.
    const auto flat = circuit.flatten();
    const std::size_t lanes = operands.empty() ? 0 : operands.begin()->second.size();
    std::vector<BitRow> in_rows;
    for (const auto& input : circuit.inputs()) {
        const auto rows = pud::transpose_in(operands.at(input.name), input.width, c.geometry.columns_per_row);
        in_rows.insert(in_rows.end(), rows.begin(), rows.end());
    }
    const auto out_rows = pud::evaluate(flat, in_rows);
    std::map<std::string, std::vector<std::uint64_t>> expected;
    {
        std::size_t bit = 0;
        for (std::size_t k = 0; k < circuit.outputs().size(); ++k) {
            const auto w = circuit.output_width(k);
            std::vector<BitRow> rows(out_rows.begin() + static_cast<std::ptrdiff_t>(bit),
                                     out_rows.begin() + static_cast<std::ptrdiff_t>(bit + w));
            expected[circuit.outputs()[k].name] = pud::transpose_out(rows, lanes);
            bit += w;
        }
    }

    const std::uint32_t lane_end = pc.lanes.end ? pc.lanes.end : c.geometry.columns_per_row;
    auto in_mask = [&](std::size_t lane) { return lane >= pc.lanes.begin && lane < lane_end; };
    std::uint64_t out_bits = 0, mismatched = 0, checked_lanes = 0;
    for (std::size_t i = 0; i < lanes; ++i) {
        if (!in_mask(i))
            continue;
        ++checked_lanes;
        for (std::size_t k = 0; k < circuit.outputs().size(); ++k) {
            const auto& name = circuit.outputs()[k].name;
            out_bits += circuit.output_width(k);
            mismatched += static_cast<std::uint64_t>(std::popcount(got.at(name)[i] ^ expected.at(name)[i]));
        }
    }

    const auto& ps = engine.stats();
    MetricsReport rep{"pud",
                      Table({"lanes", "checked_lanes", "ops", "cycles", "rows_used", "peak_temps", "output_bits",
                             "mismatched_bits", "bit_error_rate", "copy_success", "logic_success", "not_success"}),
                      Table(), {}};
    std::uint64_t ops = 0;
    for (auto n : ps.ops)
        ops += n;
    rep.summary.add_row({{"lanes", detail::i64(lanes)},
                         {"checked_lanes", detail::i64(checked_lanes)},
                         {"ops", detail::i64(ops)},
                         {"cycles", detail::i64(ps.cycles)},
                         {"rows_used", std::int64_t{prog.rows_used}},
                         {"peak_temps", std::int64_t{prog.peak_temps}},
                         {"output_bits", detail::i64(out_bits)},
                         {"mismatched_bits", detail::i64(mismatched)},
                         {"bit_error_rate", out_bits ? static_cast<double>(mismatched) / static_cast<double>(out_bits)
                                                     : 0.0},
                         {"copy_success", ps.success_rate(pud::NoiseClass::copy)},
                         {"logic_success", ps.success_rate(pud::NoiseClass::logic)},
                         {"not_success", ps.success_rate(pud::NoiseClass::bit_not)}});

    std::vector<std::string> cols = {"lane"};
    for (const auto& input : circuit.inputs())
        cols.push_back(input.name);
    for (const auto& o : circuit.outputs())
        cols.push_back(o.name);
    for (const auto& o : circuit.outputs())
        cols.push_back("expected_" + o.name);
    rep.detail = Table(cols);
    for (std::size_t i = 0; i < lanes; ++i) {
        std::map<std::string, Value> r;
        r["lane"] = detail::i64(i);
        for (const auto& input : circuit.inputs())
            r[input.name] = detail::unsigned_value(operands.at(input.name)[i]);
        for (const auto& o : circuit.outputs()) {
            r[o.name] = detail::unsigned_value(got.at(o.name)[i]);
            r["expected_" + o.name] = detail::unsigned_value(expected.at(o.name)[i]);
        }
        rep.detail.add_row(r);
    }
    if (lanes > checked_lanes)
        rep.notes.push_back(std::to_string(lanes - checked_lanes) + " lanes lie outside the lane mask and are not computed");
    return rep;
}

inline MetricsReport trng_run(const ExperimentConfig& c) {
    if (!c.trng)
        throw ConfigError("trng needs a 'trng' section");
    const auto& tc = *c.trng;
    Device dev = make_device(c);
    pud::PudEngine engine(dev);
    const pud::TrngCalibration cal;
    const auto res = pud::quac_trng(engine, tc.first, tc.rows, tc.bits, cal);
    std::uint64_t ones = 0;
    for (bool b : res.bits)
        ones += b;
    const auto runs = pud::runs_test(res.bits);
    MetricsReport rep{"trng",
                      Table({"rows", "bits", "ops", "bits_per_op", "throughput_gbps", "ones", "monobit_bias", "runs",
                             "runs_expected", "runs_z", "runs_p"}),
                      Table({"rows", "throughput_gbps", "relative_to_4"}), {}};
    rep.summary.add_row({{"rows", std::int64_t{tc.rows}},
                         {"bits", detail::i64(res.bits.size())},
                         {"ops", detail::i64(res.ops)},
                         {"bits_per_op", res.bits_per_op},
                         {"throughput_gbps", res.throughput_gbps},
                         {"ones", detail::i64(ones)},
                         {"monobit_bias", pud::monobit_bias(res.bits)},
                         {"runs", detail::i64(runs.runs)},
                         {"runs_expected", runs.expected},
                         {"runs_z", runs.z},
                         {"runs_p", runs.p_value}});
    const double base = pud::trng_throughput_gbps(4, c.geometry, c.timing, cal);
    for (const auto& [rows, _] : cal.relative) {
        const double t = pud::trng_throughput_gbps(rows, c.geometry, c.timing, cal);
        rep.detail.add_row({{"rows", std::int64_t{rows}}, {"throughput_gbps", t}, {"relative_to_4", t / base}});
    }
    return rep;
}

inline MetricsReport pnm_run(const ExperimentConfig& c) {
    if (!c.pnm)
        throw ConfigError("pnm needs a 'pnm' section");
    const auto& pc = *c.pnm;
    const auto placement = pnm::papi_schedule(pc.kernels, pc.units);
    MetricsReport rep{"pnm",
                      Table({"kernel", "intensity", "unit", "class", "bound", "time_s", "energy_j", "bytes_moved"}),
                      Table(), {}};
    std::map<std::string, const pnm::UnitSpec*> by_name;
    for (const auto& u : pc.units)
        by_name[u.name] = &u;
    for (std::size_t i = 0; i < placement.assignments.size(); ++i) {
        const auto& a = placement.assignments[i];
        rep.summary.add_row({{"kernel", a.kernel},
                             {"intensity", pc.kernels[i].arithmetic_intensity()},
                             {"unit", a.unit},
                             {"class", std::string(pnm::to_string(by_name.at(a.unit)->cls))},
                             {"bound", std::string(pnm::to_string(a.bound))},
                             {"time_s", a.time},
                             {"energy_j", a.energy},
                             {"bytes_moved", a.bytes_moved}});
    }
    rep.summary.add_row({{"kernel", std::string("(total)")},
                         {"time_s", placement.makespan},
                         {"energy_j", placement.energy},
                         {"bytes_moved", placement.bytes_moved}});
    if (pc.scaling) {
        const auto& s = *pc.scaling;
        auto u = by_name.find(s.unit);
        if (u == by_name.end())
            throw ConfigError("pnm.scaling.unit '" + s.unit + "' is not a declared unit");
        const pnm::KernelDescriptor* k = nullptr;
        for (const auto& kd : pc.kernels)
            if (kd.name == s.kernel)
                k = &kd;
        if (!k)
            throw ConfigError("pnm.scaling.kernel '" + s.kernel + "' is not a declared kernel");
        rep.detail = Table({"units", "throughput_ops", "ratio"});
        for (const auto& p : pnm::scaling_curve(*u->second, *k, s.max_units, s.host_fed))
            rep.detail.add_row({{"units", std::int64_t{p.units}}, {"throughput_ops", p.throughput}, {"ratio", p.ratio}});
    }
    rep.notes.push_back("makespan " + format_double(placement.makespan) + " s, " + format_double(placement.bytes_moved) +
                        " bytes moved, " + format_double(placement.energy) + " J");
    return rep;
}

inline MetricsReport run_command(const ExperimentConfig& c, const std::string& command);

namespace detail {

inline Value scalar_value(const YAML::Node& n) {
    if (!n.IsScalar())
        return YAML::Dump(n);
    if (auto i = convert<std::int64_t>(n))
        return *i;
    if (auto d = convert<double>(n))
        return *d;
    return n.Scalar();
}

} // namespace detail

// Runs the configured subcommand once per point of the Cartesian product of
// the sweep parameters (first parameter outermost), in order.  Each point is
// the base document with the point's values substituted, re-validated.
inline MetricsReport sweep(const ExperimentConfig& c) {
    if (!c.sweep)
        throw ConfigError("sweep needs a 'sweep' section");
    const auto& sw = *c.sweep;
    std::vector<std::size_t> idx(sw.parameters.size(), 0);
    MetricsReport rep{"sweep", Table(), Table(), {}};
    std::vector<std::string> prefix = {"point"};
    for (const auto& p : sw.parameters)
        prefix.push_back(p.key);
    std::uint64_t point = 0;
    for (;;) {
        YAML::Node doc = YAML::Clone(c.raw);
        doc.remove("sweep");
        std::map<std::string, Value> params;
        params["point"] = detail::i64(point);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const auto& p = sw.parameters[i];
            set_path(doc, split(p.key, "."), p.values[idx[i]]);
            params[p.key] = detail::scalar_value(p.values[idx[i]]);
        }
        ExperimentConfig pc;
        try {
            pc = config_from_yaml(doc, c.base_dir);
        } catch (const ConfigError& e) {
            throw ConfigError("sweep point " + std::to_string(point) + ": " + e.what());
        }
        const MetricsReport r = run_command(pc, sw.command);
        auto absorb = [&](Table& dst, const Table& src) {
            if (src.columns().empty())
                return;
            if (dst.columns().empty()) {
                auto cols = prefix;
                cols.insert(cols.end(), src.columns().begin(), src.columns().end());
                dst = Table(cols);
            }
            for (std::size_t row = 0; row < src.rows().size(); ++row) {
                auto cells = params;
                for (std::size_t k = 0; k < src.columns().size(); ++k)
                    cells[src.columns()[k]] = src.rows()[row][k];
                dst.add_row(cells);
            }
        };
        absorb(rep.summary, r.summary);
        absorb(rep.detail, r.detail);
        ++point;
        // odometer, last parameter fastest
        std::size_t i = idx.size();
        while (i > 0) {
            --i;
            if (++idx[i] < sw.parameters[i].values.size())
                break;
            idx[i] = 0;
            if (i == 0) {
                i = idx.size() + 1;
                break;
            }
        }
        if (idx.empty() || i == idx.size() + 1)
            break;
    }
    return rep;
}

inline MetricsReport run_command(const ExperimentConfig& c, const std::string& command) {
    if (command == "simulate")
        return simulate(c);
    if (command == "attack")
        return attack(c);
    if (command == "pud")
        return pud_run(c);
    if (command == "trng")
        return trng_run(c);
    if (command == "pnm")
        return pnm_run(c);
    if (command == "sweep")
        return sweep(c);
    throw ConfigError("unknown command '" + command + "'");
}

} // namespace memcentric::harness
