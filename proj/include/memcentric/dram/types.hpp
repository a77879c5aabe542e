#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "memcentric/common/bit_row.hpp"
#include "memcentric/common/error.hpp"

namespace memcentric {

using Cycle = std::uint64_t;

// Row index flattened over the whole device (see DramGeometry::flat).
using RowIndex = std::uint32_t;

struct RowAddress {
    std::uint32_t channel = 0;
    std::uint32_t rank = 0;
    std::uint32_t bank = 0;
    std::uint32_t subarray = 0;
    std::uint32_t row = 0;

    friend bool operator==(const RowAddress&, const RowAddress&) = default;
    friend auto operator<=>(const RowAddress&, const RowAddress&) = default;
};

inline std::string to_string(const RowAddress& a) {
    return "ch" + std::to_string(a.channel) + ".ra" + std::to_string(a.rank) + ".ba" + std::to_string(a.bank) +
           ".sa" + std::to_string(a.subarray) + ".r" + std::to_string(a.row);
}

struct DramGeometry {
    std::uint32_t channels = 1;
    std::uint32_t ranks_per_channel = 1;
    std::uint32_t banks_per_rank = 4;
    std::uint32_t subarrays_per_bank = 8;
    std::uint32_t rows_per_subarray = 512;
    std::uint32_t columns_per_row = 1024;

    void validate() const {
        if (channels < 1)
            throw ConfigError("geometry: channels >= 1");
        if (ranks_per_channel < 1)
            throw ConfigError("geometry: ranks_per_channel >= 1");
        if (banks_per_rank < 1)
            throw ConfigError("geometry: banks_per_rank >= 1");
        if (subarrays_per_bank < 1)
            throw ConfigError("geometry: subarrays_per_bank >= 1");
        if (rows_per_subarray < 4)
            throw ConfigError("geometry: rows_per_subarray >= 4");
        if (columns_per_row < 8 || columns_per_row % 8 != 0)
            throw ConfigError("geometry: columns_per_row must be a positive multiple of 8");
        if (static_cast<std::uint64_t>(total_rows()) > 0xffffffffull)
            throw ConfigError("geometry: more than 2^32 rows");
    }

    std::uint64_t total_banks() const {
        return std::uint64_t{channels} * ranks_per_channel * banks_per_rank;
    }
    std::uint32_t rows_per_bank() const { return subarrays_per_bank * rows_per_subarray; }
    std::uint64_t total_rows() const { return total_banks() * rows_per_bank(); }

    bool contains(const RowAddress& a) const {
        return a.channel < channels && a.rank < ranks_per_channel && a.bank < banks_per_rank &&
               a.subarray < subarrays_per_bank && a.row < rows_per_subarray;
    }

    void check(const RowAddress& a) const {
        if (!contains(a))
            throw AddressError("address " + to_string(a) + " outside geometry");
    }

    std::uint32_t bank_index(const RowAddress& a) const {
        return (a.channel * ranks_per_channel + a.rank) * banks_per_rank + a.bank;
    }
    std::uint32_t rank_index(const RowAddress& a) const { return a.channel * ranks_per_channel + a.rank; }

    // Row position inside its bank, subarray-major.
    std::uint32_t bank_row(const RowAddress& a) const { return a.subarray * rows_per_subarray + a.row; }

    RowIndex flat(const RowAddress& a) const { return bank_index(a) * rows_per_bank() + bank_row(a); }

    RowAddress address(RowIndex idx) const {
        RowAddress a;
        a.row = idx % rows_per_subarray;
        idx /= rows_per_subarray;
        a.subarray = idx % subarrays_per_bank;
        idx /= subarrays_per_bank;
        a.bank = idx % banks_per_rank;
        idx /= banks_per_rank;
        a.rank = idx % ranks_per_channel;
        a.channel = idx / ranks_per_channel;
        return a;
    }

    friend bool operator==(const DramGeometry&, const DramGeometry&) = default;
};

struct TimingParams {
    double clock_ns = 1.25;
    Cycle tRCD = 11;
    Cycle tRAS = 28;
    Cycle tRP = 11;
    Cycle tRC = 39;
    Cycle tRFC = 280;
    Cycle tBURST = 4;
    Cycle tREFI = 6240;
    Cycle tREFW = 51'200'000; // 64 ms at 1.25 ns
    Cycle nack_retry_backoff = 20;

    void validate() const {
        if (!(clock_ns > 0))
            throw ConfigError("timing: clock_ns > 0");
        if (tRCD == 0 || tRAS == 0 || tRP == 0 || tRFC == 0 || tBURST == 0 || nack_retry_backoff == 0)
            throw ConfigError("timing: all parameters > 0");
        if (tRC != tRAS + tRP)
            throw ConfigError("timing: tRC = tRAS + tRP");
        if (tREFI < tRC)
            throw ConfigError("timing: tREFI >= tRC");
        if (tRFC >= tREFI)
            throw ConfigError("timing: tRFC < tREFI");
        if (tREFW < tREFI)
            throw ConfigError("timing: tREFW >= tREFI");
    }

    friend bool operator==(const TimingParams&, const TimingParams&) = default;
};

enum class RegionScope { subarray, bank, rank };

inline const char* to_string(RegionScope s) {
    switch (s) {
    case RegionScope::subarray: return "subarray";
    case RegionScope::bank: return "bank";
    case RegionScope::rank: return "rank";
    }
    return "?";
}

// A lockable set of rows.  Index fields below the scope are ignored.
struct Region {
    RegionScope scope = RegionScope::subarray;
    std::uint32_t channel = 0;
    std::uint32_t rank = 0;
    std::uint32_t bank = 0;
    std::uint32_t subarray = 0;

    static Region of(const RowAddress& a, RegionScope scope) {
        Region r{scope, a.channel, a.rank, 0, 0};
        if (scope != RegionScope::rank)
            r.bank = a.bank;
        if (scope == RegionScope::subarray)
            r.subarray = a.subarray;
        return r;
    }

    bool contains(const RowAddress& a) const {
        if (a.channel != channel || a.rank != rank)
            return false;
        if (scope == RegionScope::rank)
            return true;
        if (a.bank != bank)
            return false;
        return scope == RegionScope::bank || a.subarray == subarray;
    }

    bool overlaps(const Region& o) const {
        if (channel != o.channel || rank != o.rank)
            return false;
        if (scope == RegionScope::rank || o.scope == RegionScope::rank)
            return true;
        if (bank != o.bank)
            return false;
        return scope == RegionScope::bank || o.scope == RegionScope::bank || subarray == o.subarray;
    }

    friend bool operator==(const Region&, const Region&) = default;
};

inline std::string to_string(const Region& r) {
    std::string s = std::string(to_string(r.scope)) + ":ch" + std::to_string(r.channel) + ".ra" + std::to_string(r.rank);
    if (r.scope != RegionScope::rank)
        s += ".ba" + std::to_string(r.bank);
    if (r.scope == RegionScope::subarray)
        s += ".sa" + std::to_string(r.subarray);
    return s;
}

enum class CommandKind { ACT, PRE, RD, WR, REF };

inline const char* to_string(CommandKind k) {
    switch (k) {
    case CommandKind::ACT: return "ACT";
    case CommandKind::PRE: return "PRE";
    case CommandKind::RD: return "RD";
    case CommandKind::WR: return "WR";
    case CommandKind::REF: return "REF";
    }
    return "?";
}

struct Command {
    CommandKind kind = CommandKind::ACT;
    RowAddress addr;
    std::optional<BitRow> payload; // WR only
    Cycle issue_cycle = 0;

    static Command act(const RowAddress& a, Cycle at = 0) { return {CommandKind::ACT, a, std::nullopt, at}; }
    static Command pre(const RowAddress& a, Cycle at = 0) { return {CommandKind::PRE, a, std::nullopt, at}; }
    static Command rd(const RowAddress& a, Cycle at = 0) { return {CommandKind::RD, a, std::nullopt, at}; }
    static Command wr(const RowAddress& a, BitRow data, Cycle at = 0) {
        return {CommandKind::WR, a, std::move(data), at};
    }
    static Command ref(const RowAddress& a, Cycle at = 0) { return {CommandKind::REF, a, std::nullopt, at}; }
};

enum class ResponseKind { OK, DATA, NACK, ALERT };

inline const char* to_string(ResponseKind k) {
    switch (k) {
    case ResponseKind::OK: return "OK";
    case ResponseKind::DATA: return "DATA";
    case ResponseKind::NACK: return "NACK";
    case ResponseKind::ALERT: return "ALERT";
    }
    return "?";
}

struct Response {
    ResponseKind kind = ResponseKind::OK;
    Cycle completion_cycle = 0;
    std::optional<BitRow> data;  // DATA
    std::optional<Region> region; // NACK
    // NACK / ALERT: earliest cycle at which the rejected command can succeed.
    // A PRE that raises ALERT has executed; every other ALERT is a rejection.
    Cycle retry_at = 0;
    bool executed = true;
};

} // namespace memcentric
