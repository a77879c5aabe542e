#pragma once

#include <cctype>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "memcentric/common/bit_row.hpp"
#include "memcentric/common/error.hpp"

namespace memcentric::pud {

enum class GateOp { AND, OR, NOT, MAJ };

inline const char* to_string(GateOp op) {
    switch (op) {
    case GateOp::AND: return "AND";
    case GateOp::OR: return "OR";
    case GateOp::NOT: return "NOT";
    case GateOp::MAJ: return "MAJ";
    }
    return "?";
}

inline std::size_t arity(GateOp op) {
    switch (op) {
    case GateOp::NOT: return 1;
    case GateOp::MAJ: return 3;
    default: return 2;
    }
}

// Reference to one bit of the flattened circuit.
struct BitRef {
    enum class Kind { input, node, constant };
    Kind kind = Kind::constant;
    std::uint32_t index = 0; // input bit, node id, or constant value

    friend bool operator==(const BitRef&, const BitRef&) = default;
};

struct BitNode {
    GateOp op = GateOp::AND;
    std::vector<BitRef> ins;
};

// Single-bit form of a circuit: every gate bit is a node, nodes are in
// topological order.
struct FlatCircuit {
    std::uint32_t input_bits = 0;
    std::vector<BitNode> nodes;
    std::vector<BitRef> outputs; // all output bits, outputs in declaration order, LSB first
};

// Gate-level circuit over bit vectors.  Gate operands are whole signals,
// single bits (`a[3]`) or the constants 0 and 1; operands of a gate must
// have equal widths (constants adapt).
class GateCircuit {
  public:
    struct Operand {
        enum class Kind { input, gate, constant };
        Kind kind = Kind::constant;
        std::uint32_t index = 0;               // input or gate number, or constant value
        std::optional<std::uint32_t> bit;      // bit select
    };
    struct Input {
        std::string name;
        std::uint32_t width = 1;
    };
    struct Gate {
        std::string name;
        GateOp op = GateOp::AND;
        std::vector<Operand> operands;
        std::uint32_t width = 1;
    };
    struct Output {
        std::string name;
        std::vector<Operand> parts; // concatenated LSB first
    };

    const std::vector<Input>& inputs() const { return inputs_; }
    const std::vector<Gate>& gates() const { return gates_; }
    const std::vector<Output>& outputs() const { return outputs_; }

    std::uint32_t add_input(const std::string& name, std::uint32_t width) {
        declare(name);
        if (width == 0 || width > 64)
            throw ConfigError("input " + name + ": width must be 1..64");
        inputs_.push_back({name, width});
        symbols_[name] = {Operand::Kind::input, static_cast<std::uint32_t>(inputs_.size() - 1), std::nullopt};
        return static_cast<std::uint32_t>(inputs_.size() - 1);
    }

    std::uint32_t add_gate(const std::string& name, GateOp op, std::vector<Operand> operands) {
        if (operands.size() != arity(op))
            throw ConfigError("gate " + name + ": " + to_string(op) + " takes " + std::to_string(arity(op)) +
                              " operands, got " + std::to_string(operands.size()));
        std::optional<std::uint32_t> width;
        for (const auto& o : operands) {
            if (o.kind == Operand::Kind::constant)
                continue;
            const std::uint32_t w = operand_width(o);
            if (width && *width != w)
                throw ConfigError("gate " + name + ": operand widths differ (" + std::to_string(*width) + " vs " +
                                  std::to_string(w) + ")");
            width = w;
        }
        declare(name);
        gates_.push_back({name, op, std::move(operands), width.value_or(1)});
        symbols_[name] = {Operand::Kind::gate, static_cast<std::uint32_t>(gates_.size() - 1), std::nullopt};
        return static_cast<std::uint32_t>(gates_.size() - 1);
    }

    void add_output(const std::string& name, std::vector<Operand> parts) {
        for (const auto& o : outputs_)
            if (o.name == name)
                throw ConfigError("output " + name + " declared twice");
        if (parts.empty())
            throw ConfigError("output " + name + " has no bits");
        std::uint32_t width = 0;
        for (const auto& p : parts)
            width += p.kind == Operand::Kind::constant ? 1 : operand_width(p);
        if (width > 64)
            throw ConfigError("output " + name + ": width above 64");
        outputs_.push_back({name, std::move(parts)});
    }

    // Resolves `name` or `name[i]` or `0` / `1`.
    Operand operand(const std::string& text) const {
        if (text == "0" || text == "1")
            return {Operand::Kind::constant, static_cast<std::uint32_t>(text == "1"), std::nullopt};
        std::string name = text;
        std::optional<std::uint32_t> bit;
        if (auto lb = text.find('['); lb != std::string::npos) {
            if (text.back() != ']' || lb + 2 > text.size() - 1)
                throw ConfigError("malformed bit select '" + text + "'");
            const std::string idx = text.substr(lb + 1, text.size() - lb - 2);
            for (char c : idx)
                if (!std::isdigit(static_cast<unsigned char>(c)))
                    throw ConfigError("malformed bit select '" + text + "'");
            name = text.substr(0, lb);
            bit = static_cast<std::uint32_t>(std::stoul(idx));
        }
        auto it = symbols_.find(name);
        if (it == symbols_.end())
            throw ConfigError("undefined signal '" + name + "'");
        Operand o = it->second;
        o.bit = bit;
        if (bit && *bit >= signal_width(o))
            throw ConfigError("bit " + std::to_string(*bit) + " of '" + name + "' out of range (width " +
                              std::to_string(signal_width(o)) + ")");
        return o;
    }

    std::uint32_t signal_width(const Operand& o) const {
        switch (o.kind) {
        case Operand::Kind::input: return inputs_[o.index].width;
        case Operand::Kind::gate: return gates_[o.index].width;
        case Operand::Kind::constant: return 1;
        }
        return 1;
    }

    std::uint32_t operand_width(const Operand& o) const { return o.bit ? 1 : signal_width(o); }

    std::uint32_t output_width(std::size_t k) const {
        std::uint32_t w = 0;
        for (const auto& p : outputs_.at(k).parts)
            w += operand_width(p);
        return w;
    }

    std::uint32_t input_offset(std::size_t k) const {
        std::uint32_t off = 0;
        for (std::size_t i = 0; i < k; ++i)
            off += inputs_[i].width;
        return off;
    }

    FlatCircuit flatten() const {
        FlatCircuit f;
        f.input_bits = input_offset(inputs_.size());
        std::vector<std::uint32_t> gate_base(gates_.size());
        auto bit_of = [&](const Operand& o, std::uint32_t i) -> BitRef {
            const std::uint32_t b = o.bit ? *o.bit : i;
            switch (o.kind) {
            case Operand::Kind::input: return {BitRef::Kind::input, input_offset(o.index) + b};
            case Operand::Kind::gate: return {BitRef::Kind::node, gate_base[o.index] + b};
            case Operand::Kind::constant: return {BitRef::Kind::constant, o.index};
            }
            return {};
        };
        for (std::size_t g = 0; g < gates_.size(); ++g) {
            gate_base[g] = static_cast<std::uint32_t>(f.nodes.size());
            for (std::uint32_t i = 0; i < gates_[g].width; ++i) {
                BitNode n{gates_[g].op, {}};
                for (const auto& o : gates_[g].operands)
                    n.ins.push_back(bit_of(o, i));
                f.nodes.push_back(std::move(n));
            }
        }
        for (const auto& out : outputs_)
            for (const auto& p : out.parts)
                for (std::uint32_t i = 0; i < operand_width(p); ++i)
                    f.outputs.push_back(bit_of(p, i));
        return f;
    }

  private:
    void declare(const std::string& name) {
        if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_'))
            throw ConfigError("invalid signal name '" + name + "'");
        for (char c : name)
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
                throw ConfigError("invalid signal name '" + name + "'");
        if (symbols_.count(name))
            throw ConfigError("signal '" + name + "' defined twice");
    }

    std::vector<Input> inputs_;
    std::vector<Gate> gates_;
    std::vector<Output> outputs_;
    std::map<std::string, Operand> symbols_;
};

// Line-oriented netlist:
//   input a 8
//   gate g1 AND a b          (AND, OR take 2 operands, NOT 1, MAJ 3)
//   gate c1 MAJ a[0] b[0] 0
//   output g1                (output named after the signal)
//   output sum = s0 s1 c1    (bits concatenated, least significant first)
// `#` starts a comment.  Errors carry the line number.
inline GateCircuit parse_netlist(std::istream& in) {
    GateCircuit c;
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
        try {
            if (tok[0] == "input") {
                if (tok.size() != 3)
                    throw ConfigError("expected 'input NAME WIDTH'");
                std::size_t used = 0;
                unsigned long w = 0;
                try {
                    w = std::stoul(tok[2], &used);
                } catch (const std::exception&) {
                    used = 0;
                }
                if (used != tok[2].size())
                    throw ConfigError("width '" + tok[2] + "' is not a number");
                c.add_input(tok[1], static_cast<std::uint32_t>(w));
            } else if (tok[0] == "gate") {
                if (tok.size() < 4)
                    throw ConfigError("expected 'gate NAME OP OPERAND...'");
                GateOp op;
                if (tok[2] == "AND")
                    op = GateOp::AND;
                else if (tok[2] == "OR")
                    op = GateOp::OR;
                else if (tok[2] == "NOT")
                    op = GateOp::NOT;
                else if (tok[2] == "MAJ")
                    op = GateOp::MAJ;
                else
                    throw ConfigError("unknown gate type '" + tok[2] + "'");
                std::vector<GateCircuit::Operand> ops;
                for (std::size_t i = 3; i < tok.size(); ++i)
                    ops.push_back(c.operand(tok[i]));
                c.add_gate(tok[1], op, std::move(ops));
            } else if (tok[0] == "output") {
                if (tok.size() == 2) {
                    c.add_output(tok[1], {c.operand(tok[1])});
                } else {
                    if (tok.size() < 4 || tok[2] != "=")
                        throw ConfigError("expected 'output NAME' or 'output NAME = BIT...'");
                    std::vector<GateCircuit::Operand> parts;
                    for (std::size_t i = 3; i < tok.size(); ++i)
                        parts.push_back(c.operand(tok[i]));
                    c.add_output(tok[1], std::move(parts));
                }
            } else {
                throw ConfigError("unknown directive '" + tok[0] + "'");
            }
        } catch (const ConfigError& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    if (c.outputs().empty())
        throw ParseError("netlist declares no outputs", lineno);
    return c;
}

inline GateCircuit parse_netlist(const std::string& text) {
    std::istringstream in(text);
    return parse_netlist(in);
}

// Bit-sliced software evaluation: input_rows holds one row per input bit
// (inputs in declaration order, LSB first); returns one row per output bit.
inline std::vector<BitRow> evaluate(const FlatCircuit& f, const std::vector<BitRow>& input_rows) {
    if (input_rows.size() != f.input_bits)
        throw CapacityError("expected " + std::to_string(f.input_bits) + " input rows, got " +
                            std::to_string(input_rows.size()));
    const std::size_t width = input_rows.empty() ? 0 : input_rows.front().size();
    const BitRow zero(width), one(width, true);
    std::vector<BitRow> nodes;
    nodes.reserve(f.nodes.size());
    auto get = [&](const BitRef& r) -> const BitRow& {
        switch (r.kind) {
        case BitRef::Kind::input: return input_rows[r.index];
        case BitRef::Kind::node: return nodes[r.index];
        case BitRef::Kind::constant: return r.index ? one : zero;
        }
        return zero;
    };
    for (const auto& n : f.nodes) {
        switch (n.op) {
        case GateOp::AND: nodes.push_back(get(n.ins[0]) & get(n.ins[1])); break;
        case GateOp::OR: nodes.push_back(get(n.ins[0]) | get(n.ins[1])); break;
        case GateOp::NOT: nodes.push_back(~get(n.ins[0])); break;
        case GateOp::MAJ: nodes.push_back(majority(get(n.ins[0]), get(n.ins[1]), get(n.ins[2]))); break;
        }
    }
    std::vector<BitRow> out;
    for (const auto& r : f.outputs)
        out.push_back(get(r));
    return out;
}

} // namespace memcentric::pud
