#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "memcentric/dram/types.hpp"

namespace memcentric::harness {

struct TraceRecord {
    Cycle cycle = 0;
    CommandKind op = CommandKind::ACT;
    RowAddress addr;
    std::optional<std::string> payload_hex; // WR only
    std::size_t line = 0;
};

inline std::optional<CommandKind> parse_op(const std::string& s) {
    if (s == "ACT")
        return CommandKind::ACT;
    if (s == "PRE")
        return CommandKind::PRE;
    if (s == "RD")
        return CommandKind::RD;
    if (s == "WR")
        return CommandKind::WR;
    if (s == "REF")
        return CommandKind::REF;
    return std::nullopt;
}

// One record per line: CYCLE OP CHANNEL RANK BANK SUBARRAY ROW [HEX]
// HEX (WR only) is the row payload, most significant digit first.  `#`
// starts a comment.  Cycles must not decrease within a channel.
inline std::vector<TraceRecord> parse_trace(std::istream& in) {
    std::vector<TraceRecord> out;
    std::map<std::uint32_t, Cycle> last;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos)
            line.erase(h);
        std::istringstream ss(line);
        std::vector<std::string> tok;
        for (std::string t; ss >> t;)
            tok.push_back(t);
        if (tok.empty())
            continue;
        if (tok.size() < 7 || tok.size() > 8)
            throw ParseError("expected 'CYCLE OP CHANNEL RANK BANK SUBARRAY ROW [HEX]', got " +
                                 std::to_string(tok.size()) + " fields",
                             lineno);
        auto num = [&](const std::string& s, const char* what) -> std::uint64_t {
            if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
                throw ParseError(std::string(what) + " '" + s + "' is not a non-negative integer", lineno);
            try {
                return std::stoull(s);
            } catch (const std::exception&) {
                throw ParseError(std::string(what) + " '" + s + "' out of range", lineno);
            }
        };
        auto field = [&](const std::string& s, const char* what) -> std::uint32_t {
            const auto v = num(s, what);
            if (v > 0xffffffffull)
                throw ParseError(std::string(what) + " '" + s + "' out of range", lineno);
            return static_cast<std::uint32_t>(v);
        };
        TraceRecord r;
        r.line = lineno;
        r.cycle = num(tok[0], "cycle");
        const auto op = parse_op(tok[1]);
        if (!op)
            throw ParseError("unknown op '" + tok[1] + "' (ACT, PRE, RD, WR, REF)", lineno);
        r.op = *op;
        r.addr = {field(tok[2], "channel"), field(tok[3], "rank"), field(tok[4], "bank"), field(tok[5], "subarray"),
                  field(tok[6], "row")};
        if (tok.size() == 8) {
            if (r.op != CommandKind::WR)
                throw ParseError("payload on a " + tok[1] + " record", lineno);
            r.payload_hex = tok[7];
        } else if (r.op == CommandKind::WR) {
            throw ParseError("WR record without payload", lineno);
        }
        auto [it, fresh] = last.try_emplace(r.addr.channel, r.cycle);
        if (!fresh) {
            if (r.cycle < it->second)
                throw ParseError("cycle " + std::to_string(r.cycle) + " before previous record on channel " +
                                     std::to_string(r.addr.channel) + " (" + std::to_string(it->second) + ")",
                                 lineno);
            it->second = r.cycle;
        }
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<TraceRecord> parse_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read trace '" + path + "'");
    return parse_trace(in);
}

// Converts a record into a device command, checking it against the geometry.
inline Command to_command(const TraceRecord& r, const DramGeometry& g) {
    if (!g.contains(r.addr))
        throw ParseError("address " + to_string(r.addr) + " outside geometry", r.line);
    Command c{r.op, r.addr, std::nullopt, r.cycle};
    if (r.payload_hex) {
        try {
            c.payload = BitRow::from_hex(*r.payload_hex, g.columns_per_row);
        } catch (const ConfigError& e) {
            throw ParseError(e.what(), r.line);
        }
    }
    return c;
}

} // namespace memcentric::harness
