#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "memcentric/dram/types.hpp"

namespace memcentric::pud {

enum class OpKind { ROWCLONE, MULTI_COPY, TRA_MAJ, NOT, MULTI_INPUT, SIMUL_ACT, SET_CONST };
enum class LogicOp { AND, NAND, OR, NOR };

inline constexpr std::size_t kMaxCopyDestinations = 31;
inline constexpr std::size_t kMaxLogicInputs = 16;

inline const char* to_string(OpKind k) {
    switch (k) {
    case OpKind::ROWCLONE: return "ROWCLONE";
    case OpKind::MULTI_COPY: return "MULTI_COPY";
    case OpKind::TRA_MAJ: return "TRA_MAJ";
    case OpKind::NOT: return "NOT";
    case OpKind::MULTI_INPUT: return "MULTI_INPUT";
    case OpKind::SIMUL_ACT: return "SIMUL_ACT";
    case OpKind::SET_CONST: return "SET_CONST";
    }
    return "?";
}

inline const char* to_string(LogicOp op) {
    switch (op) {
    case LogicOp::AND: return "AND";
    case LogicOp::NAND: return "NAND";
    case LogicOp::OR: return "OR";
    case LogicOp::NOR: return "NOR";
    }
    return "?";
}

// One in-array operation.  Row roles by kind:
//   ROWCLONE     rows = {src, dst}
//   MULTI_COPY   rows = {src, dst_1 .. dst_m}, 1 <= m <= 31
//   TRA_MAJ      rows = {a, b, c}; all three end up holding MAJ(a, b, c)
//   NOT          rows = {src, dst}
//   MULTI_INPUT  rows = {in_1 .. in_k, dst}, 2 <= k <= 16
//   SIMUL_ACT    rows = 2, 4, 8, 16 or 32 rows left holding random bits
//   SET_CONST    rows = {dst}, filled with `value`
struct MicroOp {
    OpKind kind = OpKind::ROWCLONE;
    std::vector<RowAddress> rows;
    LogicOp logic = LogicOp::AND;
    bool value = false;

    static MicroOp rowclone(RowAddress src, RowAddress dst) { return {OpKind::ROWCLONE, {src, dst}}; }
    static MicroOp multi_copy(RowAddress src, const std::vector<RowAddress>& dsts) {
        MicroOp op{OpKind::MULTI_COPY, {src}};
        op.rows.insert(op.rows.end(), dsts.begin(), dsts.end());
        return op;
    }
    static MicroOp tra_maj(RowAddress a, RowAddress b, RowAddress c) { return {OpKind::TRA_MAJ, {a, b, c}}; }
    static MicroOp bit_not(RowAddress src, RowAddress dst) { return {OpKind::NOT, {src, dst}}; }
    static MicroOp multi_input(LogicOp logic, const std::vector<RowAddress>& inputs, RowAddress dst) {
        MicroOp op{OpKind::MULTI_INPUT, inputs, logic};
        op.rows.push_back(dst);
        return op;
    }
    static MicroOp simul_act(const std::vector<RowAddress>& rows) { return {OpKind::SIMUL_ACT, rows}; }
    static MicroOp set_const(RowAddress dst, bool value) { return {OpKind::SET_CONST, {dst}, LogicOp::AND, value}; }

    // Rows whose contents the op replaces.
    std::vector<RowAddress> destinations() const {
        switch (kind) {
        case OpKind::ROWCLONE:
        case OpKind::NOT: return {rows[1]};
        case OpKind::MULTI_COPY: return {rows.begin() + 1, rows.end()};
        case OpKind::TRA_MAJ:
        case OpKind::SIMUL_ACT:
        case OpKind::SET_CONST: return rows;
        case OpKind::MULTI_INPUT: return {rows.back()};
        }
        return {};
    }

    // Same op moved into the subarray `base` (only its row fields are kept).
    MicroOp rebased(const RowAddress& base) const {
        MicroOp op = *this;
        for (auto& r : op.rows) {
            r.channel = base.channel;
            r.rank = base.rank;
            r.bank = base.bank;
            r.subarray = base.subarray;
        }
        return op;
    }

    friend bool operator==(const MicroOp&, const MicroOp&) = default;
};

inline bool same_subarray(const RowAddress& a, const RowAddress& b) {
    return a.channel == b.channel && a.rank == b.rank && a.bank == b.bank && a.subarray == b.subarray;
}

inline void validate(const MicroOp& op, const DramGeometry& g) {
    const std::string name = to_string(op.kind);
    if (op.rows.empty())
        throw ConfigError(name + ": no rows");
    for (const auto& r : op.rows) {
        g.check(r);
        if (!same_subarray(r, op.rows.front()))
            throw AddressError(name + ": rows " + to_string(op.rows.front()) + " and " + to_string(r) +
                               " are in different subarrays");
    }
    auto distinct = [&](auto first, auto last) {
        std::vector<std::uint32_t> v;
        for (auto it = first; it != last; ++it)
            v.push_back(it->row);
        std::sort(v.begin(), v.end());
        return std::adjacent_find(v.begin(), v.end()) == v.end();
    };
    auto need = [&](bool ok, const std::string& what) {
        if (!ok)
            throw ConfigError(name + ": " + what);
    };
    switch (op.kind) {
    case OpKind::ROWCLONE:
    case OpKind::NOT:
        need(op.rows.size() == 2, "needs exactly a source and a destination row");
        need(op.rows[0].row != op.rows[1].row, "source and destination must differ");
        break;
    case OpKind::MULTI_COPY:
        need(op.rows.size() >= 2, "needs at least one destination");
        need(op.rows.size() - 1 <= kMaxCopyDestinations,
             std::to_string(op.rows.size() - 1) + " destinations, at most 31 allowed");
        need(distinct(op.rows.begin(), op.rows.end()), "rows must be distinct");
        break;
    case OpKind::TRA_MAJ:
        need(op.rows.size() == 3, "needs exactly three rows");
        need(distinct(op.rows.begin(), op.rows.end()), "rows must be distinct");
        break;
    case OpKind::MULTI_INPUT:
        need(op.rows.size() >= 3, "needs at least two inputs and a destination");
        need(op.rows.size() - 1 <= kMaxLogicInputs,
             std::to_string(op.rows.size() - 1) + " inputs, at most 16 allowed");
        need(distinct(op.rows.begin(), op.rows.end()), "rows must be distinct");
        break;
    case OpKind::SIMUL_ACT: {
        const auto n = op.rows.size();
        need(n == 2 || n == 4 || n == 8 || n == 16 || n == 32, "row count must be 2, 4, 8, 16 or 32");
        need(distinct(op.rows.begin(), op.rows.end()), "rows must be distinct");
        break;
    }
    case OpKind::SET_CONST:
        need(op.rows.size() == 1, "needs exactly one row");
        break;
    }
}

// Modeled latency in cycles.  Copies, NOT and many-row logic are an
// ACT-ACT-PRE sequence; a triple or simultaneous activation is one ACT-PRE.
inline Cycle op_cycles(const MicroOp& op, const TimingParams& t) {
    switch (op.kind) {
    case OpKind::TRA_MAJ:
    case OpKind::SIMUL_ACT: return t.tRAS + t.tRP;
    default: return 2 * t.tRAS + t.tRP;
    }
}

inline std::string to_string(const MicroOp& op) {
    std::string s = to_string(op.kind);
    if (op.kind == OpKind::MULTI_INPUT)
        s += std::string(" ") + to_string(op.logic);
    for (std::size_t i = 0; i < op.rows.size(); ++i) {
        if ((op.kind == OpKind::ROWCLONE || op.kind == OpKind::NOT || op.kind == OpKind::MULTI_INPUT) &&
            i + 1 == op.rows.size())
            s += " ->";
        else if (op.kind == OpKind::MULTI_COPY && i == 1)
            s += " ->";
        s += " r" + std::to_string(op.rows[i].row);
    }
    if (op.kind == OpKind::SET_CONST)
        s += op.value ? " = 1" : " = 0";
    return s;
}

} // namespace memcentric::pud
