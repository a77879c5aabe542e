#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "memcentric/common/random.hpp"
#include "memcentric/dram/device.hpp"
#include "memcentric/pud/micro_op.hpp"

namespace memcentric::pud {

// Per-bit success probabilities of in-array operations.  A destination bit
// is written correctly with the op's probability and inverted otherwise,
// independently of every other bit.
struct NoiseModel {
    bool enabled = false;
    double p_copy = 0.9998;
    double p_logic = 0.94;
    double p_not = 0.94;
    std::uint64_t stream = static_cast<std::uint64_t>(StreamId::pud);

    void validate() const {
        for (double p : {p_copy, p_logic, p_not})
            if (!(p > 0.0 && p <= 1.0))
                throw ConfigError("noise: probabilities must be in (0, 1]");
    }

    friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

enum class NoiseClass { copy, logic, bit_not, none };

inline NoiseClass noise_class(OpKind k) {
    switch (k) {
    case OpKind::ROWCLONE:
    case OpKind::MULTI_COPY: return NoiseClass::copy;
    case OpKind::TRA_MAJ:
    case OpKind::MULTI_INPUT: return NoiseClass::logic;
    case OpKind::NOT: return NoiseClass::bit_not;
    default: return NoiseClass::none;
    }
}

inline double success_probability(const NoiseModel& n, OpKind k) {
    if (!n.enabled)
        return 1.0;
    switch (noise_class(k)) {
    case NoiseClass::copy: return n.p_copy;
    case NoiseClass::logic: return n.p_logic;
    case NoiseClass::bit_not: return n.p_not;
    case NoiseClass::none: return 1.0;
    }
    return 1.0;
}

// Columns [begin, end) that ops may modify; end = 0 means the whole row.
struct LaneMask {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
};

struct PudStats {
    std::array<std::uint64_t, 7> ops{};      // by OpKind
    std::array<std::uint64_t, 3> bits{};     // written, by NoiseClass copy/logic/not
    std::array<std::uint64_t, 3> flipped{};  // inverted by noise
    Cycle cycles = 0;

    double success_rate(NoiseClass c) const {
        const auto i = static_cast<std::size_t>(c);
        return bits[i] ? 1.0 - static_cast<double>(flipped[i]) / static_cast<double>(bits[i]) : 1.0;
    }
};

// Exact result of `op` for its destination rows, before noise.
inline BitRow exact_result(const DeviceState& s, const MicroOp& op, Rng& resolve) {
    const auto& g = s.geometry;
    auto row = [&](std::size_t i) -> const BitRow& { return s.rows[g.flat(op.rows[i])].data; };
    switch (op.kind) {
    case OpKind::ROWCLONE:
    case OpKind::MULTI_COPY: return row(0);
    case OpKind::TRA_MAJ: return majority(row(0), row(1), row(2));
    case OpKind::NOT: return ~row(0);
    case OpKind::MULTI_INPUT: {
        const std::size_t k = op.rows.size() - 1;
        BitRow acc = row(0);
        const bool conj = op.logic == LogicOp::AND || op.logic == LogicOp::NAND;
        for (std::size_t i = 1; i < k; ++i) {
            if (conj)
                acc &= row(i);
            else
                acc |= row(i);
        }
        return op.logic == LogicOp::NAND || op.logic == LogicOp::NOR ? ~acc : acc;
    }
    case OpKind::SIMUL_ACT: {
        BitRow bits(g.columns_per_row);
        for (auto& w : bits.words())
            w = resolve.next();
        if (g.columns_per_row % 64)
            bits.words().back() &= (std::uint64_t{1} << (g.columns_per_row % 64)) - 1;
        return bits;
    }
    case OpKind::SET_CONST: return BitRow(g.columns_per_row, op.value);
    }
    return {};
}

// Executes one op against the device: reserves the subarray for the op's
// latency, computes the result and writes it, with noise, into every
// destination row inside `lanes`.
inline void exec_microop(Device& dev, const MicroOp& op, const NoiseModel& noise, Rng& rng, Rng& resolve,
                         LaneMask lanes = {}, PudStats* stats = nullptr) {
    const auto& g = dev.geometry();
    validate(op, g);
    const std::uint32_t lo = lanes.begin;
    const std::uint32_t hi = lanes.end ? lanes.end : g.columns_per_row;
    if (lo >= hi || hi > g.columns_per_row)
        throw CapacityError("lane mask [" + std::to_string(lo) + ", " + std::to_string(hi) + ") outside the row");
    const Cycle cost = op_cycles(op, dev.timing());
    dev.reserve_subarray(op.rows.front(), cost);

    auto& s = dev.mutable_state();
    const BitRow exact = exact_result(s, op, resolve);
    const double p = success_probability(noise, op.kind);
    const NoiseClass cls = noise_class(op.kind);
    for (const auto& dst : op.destinations()) {
        BitRow out = exact;
        std::uint64_t flips = 0;
        if (p < 1.0) {
            const double q = 1.0 - p;
            for (std::uint32_t j = lo; j < hi; ++j)
                if (rng.uniform() < q) {
                    out.flip(j);
                    ++flips;
                }
        }
        BitRow& target = s.rows[g.flat(dst)].data;
        if (lo == 0 && hi == g.columns_per_row)
            target = std::move(out);
        else
            target.assign_columns(out, lo, hi);
        if (stats && cls != NoiseClass::none) {
            stats->bits[static_cast<std::size_t>(cls)] += hi - lo;
            stats->flipped[static_cast<std::size_t>(cls)] += flips;
        }
    }
    if (stats) {
        ++stats->ops[static_cast<std::size_t>(op.kind)];
        stats->cycles += cost;
    }
}

// Executes micro-ops against one device with its own noise and
// metastability streams.
class PudEngine {
  public:
    PudEngine(Device& dev, NoiseModel noise = {}, LaneMask lanes = {})
        : dev_(dev), noise_(noise), lanes_(lanes), rng_(dev.state().seed, noise.stream),
          resolve_(make_stream(dev.state().seed, StreamId::trng)) {
        noise_.validate();
    }

    void exec(const MicroOp& op) { exec_microop(dev_, op, noise_, rng_, resolve_, lanes_, &stats_); }

    void run(const std::vector<MicroOp>& ops, const RowAddress& subarray) {
        for (const auto& op : ops)
            exec(op.rebased(subarray));
    }

    Device& device() { return dev_; }
    const NoiseModel& noise() const { return noise_; }
    void set_noise(const NoiseModel& n) {
        n.validate();
        noise_ = n;
    }
    const LaneMask& lanes() const { return lanes_; }
    const PudStats& stats() const { return stats_; }

  private:
    Device& dev_;
    NoiseModel noise_;
    LaneMask lanes_;
    Rng rng_;
    Rng resolve_;
    PudStats stats_;
};

} // namespace memcentric::pud
