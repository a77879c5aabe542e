#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "memcentric/pud/exec.hpp"

namespace memcentric::pud {

// Throughput calibration of the multi-row-activation TRNG.  The model
// harvests a fixed number of unbiased bits per activation in each bank of a
// channel, with banks operating in parallel; the per-op harvest is solved
// from the target throughput, so the reported figures hold by construction
// for any geometry and timing.
struct TrngCalibration {
    double base_gbps = 3.44;                       // 4-row activation, per channel
    std::map<std::uint32_t, double> relative = {   // throughput relative to 4 rows
        {2, 0.50}, {4, 1.00}, {8, 1.25}, {16, 1.06}, {32, 0.88}};

    double target_gbps(std::uint32_t rows) const {
        auto it = relative.find(rows);
        if (it == relative.end())
            throw ConfigError("TRNG row count " + std::to_string(rows) + " not in {2, 4, 8, 16, 32}");
        return base_gbps * it->second;
    }
};

inline Cycle simul_act_cycles(const TimingParams& t) { return t.tRAS + t.tRP; }

// Unbiased bits harvested per simultaneous activation in one bank.
inline double harvest_bits_per_op(std::uint32_t rows, const DramGeometry& g, const TimingParams& t,
                                  const TrngCalibration& cal) {
    const double op_ns = static_cast<double>(simul_act_cycles(t)) * t.clock_ns;
    return cal.target_gbps(rows) * op_ns / static_cast<double>(g.banks_per_rank);
}

// bits / ns == Gb/s.
inline double trng_throughput_gbps(std::uint32_t rows, const DramGeometry& g, const TimingParams& t,
                                   const TrngCalibration& cal) {
    const double op_ns = static_cast<double>(simul_act_cycles(t)) * t.clock_ns;
    return harvest_bits_per_op(rows, g, t, cal) * static_cast<double>(g.banks_per_rank) / op_ns;
}

struct TrngResult {
    std::vector<bool> bits;
    std::uint64_t ops = 0;
    double throughput_gbps = 0.0;
    double bits_per_op = 0.0;
};

// Generates n_bits random bits with repeated SIMUL_ACT over `rows` rows
// starting at `first` in its subarray, harvesting the calibrated number of
// columns from each activation.
inline TrngResult quac_trng(PudEngine& engine, const RowAddress& first, std::uint32_t rows, std::uint64_t n_bits,
                            const TrngCalibration& cal = {}, std::uint64_t max_ops = 100'000'000) {
    Device& dev = engine.device();
    const auto& g = dev.geometry();
    const auto& t = dev.timing();
    TrngResult res;
    res.bits_per_op = harvest_bits_per_op(rows, g, t, cal);
    res.throughput_gbps = trng_throughput_gbps(rows, g, t, cal);
    const auto per_op = static_cast<std::uint64_t>(std::floor(res.bits_per_op));
    if (per_op == 0 || per_op > g.columns_per_row)
        throw CapacityError("calibrated harvest of " + std::to_string(res.bits_per_op) + " bits per activation does "
                            "not fit a " + std::to_string(g.columns_per_row) + "-column row");
    if (first.row + rows > g.rows_per_subarray)
        throw AddressError("TRNG rows " + std::to_string(first.row) + ".." + std::to_string(first.row + rows - 1) +
                           " exceed the subarray");
    if ((n_bits + per_op - 1) / per_op > max_ops)
        throw CapacityError(std::to_string(n_bits) + " bits need more than " + std::to_string(max_ops) +
                            " activations");
    std::vector<RowAddress> group;
    for (std::uint32_t k = 0; k < rows; ++k) {
        RowAddress a = first;
        a.row += k;
        group.push_back(a);
    }
    const MicroOp op = MicroOp::simul_act(group);
    res.bits.reserve(n_bits);
    while (res.bits.size() < n_bits) {
        engine.exec(op);
        ++res.ops;
        const BitRow& r = dev.peek_row(first);
        for (std::uint64_t j = 0; j < per_op && res.bits.size() < n_bits; ++j)
            res.bits.push_back(r.get(j));
    }
    return res;
}

// |ones / n - 0.5|.
inline double monobit_bias(const std::vector<bool>& bits) {
    if (bits.empty())
        return 0.0;
    std::uint64_t ones = 0;
    for (bool b : bits)
        ones += b;
    return std::fabs(static_cast<double>(ones) / static_cast<double>(bits.size()) - 0.5);
}

struct RunsTest {
    std::uint64_t runs = 0;
    double expected = 0.0;
    double z = 0.0;
    double p_value = 1.0;
};

// Wald-Wolfowitz runs test on the bit sequence (normal approximation).
inline RunsTest runs_test(const std::vector<bool>& bits) {
    RunsTest r;
    const double n = static_cast<double>(bits.size());
    if (bits.size() < 2)
        return r;
    double ones = 0;
    for (bool b : bits)
        ones += b;
    const double zeros = n - ones;
    r.runs = 1;
    for (std::size_t i = 1; i < bits.size(); ++i)
        r.runs += bits[i] != bits[i - 1];
    if (ones == 0 || zeros == 0) {
        r.p_value = 0.0;
        return r;
    }
    r.expected = 2.0 * ones * zeros / n + 1.0;
    const double var = 2.0 * ones * zeros * (2.0 * ones * zeros - n) / (n * n * (n - 1.0));
    r.z = (static_cast<double>(r.runs) - r.expected) / std::sqrt(var);
    r.p_value = std::erfc(std::fabs(r.z) / std::sqrt(2.0));
    return r;
}

} // namespace memcentric::pud
