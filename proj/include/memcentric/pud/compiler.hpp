#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "memcentric/pud/circuit.hpp"
#include "memcentric/pud/exec.hpp"
#include "memcentric/pud/layout.hpp"
#include "memcentric/pud/micro_op.hpp"

namespace memcentric::pud {

// A compiled circuit.  Row numbers are subarray-local; ops carry subarray 0
// of bank 0 and are moved to a real subarray with MicroOp::rebased.
//
// Row layout: input bits | output bits | C0 C1 | T0 T1 T2 | temporaries.
// C0 / C1 hold all-zero / all-one rows, T0..T2 are the triple-activation
// rows, temporaries hold intermediate gate results.
struct Program {
    std::vector<MicroOp> ops;
    std::map<std::string, std::vector<std::uint32_t>> input_rows;  // by input name, LSB first
    std::map<std::string, std::vector<std::uint32_t>> output_rows; // by output name, LSB first
    std::vector<std::string> input_order;
    std::vector<std::string> output_order;
    std::uint32_t c0 = 0, c1 = 0;
    std::uint32_t t0 = 0;
    std::uint32_t first_temp = 0;
    std::uint32_t peak_temps = 0;
    std::uint32_t rows_used = 0;

    Cycle cycles(const TimingParams& t) const {
        Cycle c = 0;
        for (const auto& op : ops)
            c += op_cycles(op, t);
        return c;
    }

    // Readable listing, stable across runs.
    std::string dump() const {
        std::ostringstream os;
        os << "# rows used " << rows_used << ", peak temporaries " << peak_temps << ", ops " << ops.size() << "\n";
        for (const auto& name : input_order) {
            os << "input " << name;
            for (auto r : input_rows.at(name))
                os << " r" << r;
            os << "\n";
        }
        for (const auto& name : output_order) {
            os << "output " << name;
            for (auto r : output_rows.at(name))
                os << " r" << r;
            os << "\n";
        }
        os << "const r" << c0 << " r" << c1 << "\n";
        os << "compute r" << t0 << " r" << t0 + 1 << " r" << t0 + 2 << "\n";
        for (std::size_t i = 0; i < ops.size(); ++i)
            os << i << ": " << to_string(ops[i]) << "\n";
        return os.str();
    }
};

namespace detail {
inline RowAddress local(std::uint32_t row) { return RowAddress{0, 0, 0, 0, row}; }
} // namespace detail

// Lowers the circuit to in-array micro-ops.  AND and OR become a triple-row
// majority with a constant row, NOT becomes the NOT op; operands are always
// copied into T0..T2 first so no operand row is destroyed.  Temporaries are
// assigned by linear scan over the topological order.  A gate whose result
// is an output bit is computed straight into the output row.
inline Program compile_circuit(const GateCircuit& circuit, std::uint32_t capacity) {
    using detail::local;
    const FlatCircuit f = circuit.flatten();
    Program p;

    std::uint32_t next = 0;
    for (const auto& in : circuit.inputs()) {
        p.input_order.push_back(in.name);
        auto& rows = p.input_rows[in.name];
        for (std::uint32_t i = 0; i < in.width; ++i)
            rows.push_back(next++);
    }
    std::vector<std::uint32_t> out_row;
    for (std::size_t k = 0; k < circuit.outputs().size(); ++k) {
        const auto& name = circuit.outputs()[k].name;
        p.output_order.push_back(name);
        auto& rows = p.output_rows[name];
        for (std::uint32_t i = 0; i < circuit.output_width(k); ++i) {
            rows.push_back(next);
            out_row.push_back(next++);
        }
    }
    p.c0 = next++;
    p.c1 = next++;
    p.t0 = next;
    next += 3;
    p.first_temp = next;
    if (p.first_temp > capacity)
        throw CapacityError("circuit needs " + std::to_string(p.first_temp) + " fixed rows (inputs, outputs, " +
                            "constants, compute), subarray has " + std::to_string(capacity));

    const std::size_t n = f.nodes.size();
    // Direct-to-output placement and remaining output copies per node.
    std::vector<std::int64_t> direct(n, -1);
    std::vector<std::vector<std::uint32_t>> extra_outputs(n);
    std::vector<bool> live(n, false);
    for (std::size_t k = 0; k < f.outputs.size(); ++k) {
        const BitRef& r = f.outputs[k];
        if (r.kind != BitRef::Kind::node)
            continue;
        live[r.index] = true;
        if (direct[r.index] < 0)
            direct[r.index] = out_row[k];
        else
            extra_outputs[r.index].push_back(out_row[k]);
    }
    // Last reader of every node, and liveness (dead gates are dropped).
    std::vector<std::int64_t> last_use(n, -1);
    for (std::size_t i = n; i-- > 0;) {
        if (!live[i])
            continue;
        for (const auto& in : f.nodes[i].ins)
            if (in.kind == BitRef::Kind::node) {
                live[in.index] = true;
                last_use[in.index] = std::max<std::int64_t>(last_use[in.index], static_cast<std::int64_t>(i));
            }
    }

    std::vector<std::uint32_t> row_of(n, 0);
    std::vector<std::uint32_t> free_temps;
    std::uint32_t temps_made = 0, temps_live = 0;
    std::vector<std::vector<std::uint32_t>> release_at(n); // temps freed after node i
    bool uses_c0 = false, uses_c1 = false;

    auto src_row = [&](const BitRef& r) -> std::uint32_t {
        switch (r.kind) {
        case BitRef::Kind::input: return r.index;
        case BitRef::Kind::node: return row_of[r.index];
        case BitRef::Kind::constant:
            (r.index ? uses_c1 : uses_c0) = true;
            return r.index ? p.c1 : p.c0;
        }
        return 0;
    };

    std::vector<MicroOp> body;
    for (std::size_t i = 0; i < n; ++i) {
        if (!live[i])
            continue;
        const BitNode& node = f.nodes[i];
        std::uint32_t dst;
        if (direct[i] >= 0) {
            dst = static_cast<std::uint32_t>(direct[i]);
        } else {
            if (free_temps.empty()) {
                if (p.first_temp + temps_made >= capacity)
                    throw CapacityError("live-range peak of " + std::to_string(temps_live + 1) +
                                        " temporaries at gate bit " + std::to_string(i) + " exceeds the " +
                                        std::to_string(capacity - p.first_temp) + " free rows of the subarray");
                free_temps.push_back(p.first_temp + temps_made++);
            }
            dst = free_temps.back();
            free_temps.pop_back();
            ++temps_live;
            p.peak_temps = std::max(p.peak_temps, temps_live);
            if (last_use[i] >= 0)
                release_at[static_cast<std::size_t>(last_use[i])].push_back(dst);
            else
                release_at[i].push_back(dst);
        }
        row_of[i] = dst;

        if (node.op == GateOp::NOT) {
            const BitRef& a = node.ins[0];
            if (a.kind == BitRef::Kind::constant)
                body.push_back(MicroOp::rowclone(local(src_row({BitRef::Kind::constant, a.index ? 0u : 1u})),
                                                 local(dst)));
            else
                body.push_back(MicroOp::bit_not(local(src_row(a)), local(dst)));
        } else {
            std::vector<BitRef> ins = node.ins;
            if (node.op == GateOp::AND)
                ins.push_back({BitRef::Kind::constant, 0});
            else if (node.op == GateOp::OR)
                ins.push_back({BitRef::Kind::constant, 1});
            for (std::uint32_t k = 0; k < 3; ++k)
                body.push_back(MicroOp::rowclone(local(src_row(ins[k])), local(p.t0 + k)));
            body.push_back(MicroOp::tra_maj(local(p.t0), local(p.t0 + 1), local(p.t0 + 2)));
            body.push_back(MicroOp::rowclone(local(p.t0), local(dst)));
        }
        for (auto r : extra_outputs[i])
            body.push_back(MicroOp::rowclone(local(dst), local(r)));
        for (auto r : release_at[i]) {
            free_temps.push_back(r);
            --temps_live;
        }
    }
    // Outputs fed straight from inputs or constants.
    for (std::size_t k = 0; k < f.outputs.size(); ++k) {
        const BitRef& r = f.outputs[k];
        if (r.kind != BitRef::Kind::node)
            body.push_back(MicroOp::rowclone(local(src_row(r)), local(out_row[k])));
    }

    if (uses_c0)
        p.ops.push_back(MicroOp::set_const(local(p.c0), false));
    if (uses_c1)
        p.ops.push_back(MicroOp::set_const(local(p.c1), true));
    p.ops.insert(p.ops.end(), body.begin(), body.end());
    p.rows_used = p.first_temp + temps_made;
    return p;
}

// Loads operands in vertical layout, runs the program in `subarray` and
// reads the outputs back.  Every operand list must have the same length.
inline std::map<std::string, std::vector<std::uint64_t>>
run_program(PudEngine& engine, const Program& prog, const GateCircuit& circuit, const RowAddress& subarray,
            const std::map<std::string, std::vector<std::uint64_t>>& operands) {
    Device& dev = engine.device();
    const auto& g = dev.geometry();
    if (prog.rows_used > g.rows_per_subarray)
        throw CapacityError("program needs " + std::to_string(prog.rows_used) + " rows, subarray has " +
                            std::to_string(g.rows_per_subarray));
    std::optional<std::size_t> count;
    for (const auto& in : circuit.inputs()) {
        auto it = operands.find(in.name);
        if (it == operands.end())
            throw ConfigError("missing operand for input '" + in.name + "'");
        if (count && *count != it->second.size())
            throw ConfigError("operand lists differ in length");
        count = it->second.size();
        const auto rows = transpose_in(it->second, in.width, g.columns_per_row);
        const auto& dst = prog.input_rows.at(in.name);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            RowAddress a = subarray;
            a.row = dst[i];
            dev.poke_row(a, rows[i]);
        }
    }
    for (const auto& [name, _] : operands)
        if (!prog.input_rows.count(name))
            throw ConfigError("operand '" + name + "' matches no circuit input");
    engine.run(prog.ops, subarray);

    std::map<std::string, std::vector<std::uint64_t>> out;
    for (const auto& name : prog.output_order) {
        std::vector<BitRow> rows;
        for (auto r : prog.output_rows.at(name)) {
            RowAddress a = subarray;
            a.row = r;
            rows.push_back(dev.peek_row(a));
        }
        out[name] = transpose_out(rows, count.value_or(0));
    }
    return out;
}

} // namespace memcentric::pud
