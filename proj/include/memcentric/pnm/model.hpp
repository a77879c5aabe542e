#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "memcentric/common/error.hpp"

namespace memcentric::pnm {

// Listed in scheduling tie-break order: lower-power classes first.
enum class UnitClass { FC_PIM, ATTN_PIM, PU };

inline const char* to_string(UnitClass c) {
    switch (c) {
    case UnitClass::FC_PIM: return "FC_PIM";
    case UnitClass::ATTN_PIM: return "ATTN_PIM";
    case UnitClass::PU: return "PU";
    }
    return "?";
}

struct UnitSpec {
    std::string name;
    UnitClass cls = UnitClass::PU;
    double peak_compute = 1.0;   // ops/s
    double mem_bandwidth = 1.0;  // bytes/s
    double capacity = 1.0;       // bytes
    double link_bandwidth = 1.0; // bytes/s to the host
    double energy_per_op = 0.0;   // J
    double energy_per_byte = 0.0; // J, per byte moved over the link

    void validate() const {
        if (!(peak_compute > 0 && mem_bandwidth > 0 && capacity > 0 && link_bandwidth > 0))
            throw ConfigError("unit " + name + ": rates and capacity must be > 0");
        if (energy_per_op < 0 || energy_per_byte < 0)
            throw ConfigError("unit " + name + ": energy coefficients must be >= 0");
    }
};

struct KernelDescriptor {
    std::string name;
    double compute_ops = 1.0;
    double bytes_touched = 1.0;
    std::string resident_unit; // unit holding the kernel's data; empty: host memory

    double arithmetic_intensity() const { return compute_ops / bytes_touched; }

    void validate() const {
        if (!(compute_ops > 0 && bytes_touched > 0))
            throw ConfigError("kernel " + name + ": compute_ops and bytes_touched must be > 0");
    }
};

// Checks unit invariants, including that capacity-oriented units are at
// least as large as compute-oriented ones.
inline void validate_units(const std::vector<UnitSpec>& units) {
    double max_fc = 0, min_attn = INFINITY;
    for (const auto& u : units) {
        u.validate();
        if (u.cls == UnitClass::FC_PIM)
            max_fc = std::max(max_fc, u.capacity);
        if (u.cls == UnitClass::ATTN_PIM)
            min_attn = std::min(min_attn, u.capacity);
        for (const auto& v : units)
            if (&u != &v && u.name == v.name)
                throw ConfigError("unit name '" + u.name + "' used twice");
    }
    if (min_attn < max_fc)
        throw ConfigError("ATTN_PIM capacity must be >= FC_PIM capacity");
}

enum class Bound { compute, memory, transfer };

inline const char* to_string(Bound b) {
    switch (b) {
    case Bound::compute: return "compute";
    case Bound::memory: return "memory";
    case Bound::transfer: return "transfer";
    }
    return "?";
}

struct TimeBreakdown {
    double compute = 0, memory = 0, transfer = 0;
    double total() const { return std::max(compute, memory) + transfer; }
    Bound bound() const {
        if (transfer > std::max(compute, memory))
            return Bound::transfer;
        return compute >= memory ? Bound::compute : Bound::memory;
    }
};

inline bool is_resident(const KernelDescriptor& k, const UnitSpec& u) { return k.resident_unit == u.name; }

inline TimeBreakdown roofline_breakdown(const KernelDescriptor& k, const UnitSpec& u) {
    TimeBreakdown t;
    t.compute = k.compute_ops / u.peak_compute;
    t.memory = k.bytes_touched / u.mem_bandwidth;
    if (!is_resident(k, u))
        t.transfer = k.bytes_touched / u.link_bandwidth;
    return t;
}

// Seconds to run `k` on `u`: roofline time plus moving non-resident data
// over the unit's host link.
inline double roofline_time(const KernelDescriptor& k, const UnitSpec& u) { return roofline_breakdown(k, u).total(); }

inline double energy(const KernelDescriptor& k, const UnitSpec& u) {
    const double moved = is_resident(k, u) ? 0.0 : k.bytes_touched;
    return moved * u.energy_per_byte + k.compute_ops * u.energy_per_op;
}

struct Assignment {
    std::string kernel;
    std::string unit;
    double time = 0;
    double energy = 0;
    double bytes_moved = 0;
    Bound bound = Bound::compute;
};

struct Placement {
    std::vector<Assignment> assignments; // in kernel order
    double makespan = 0;                 // units run their kernels back to back, in parallel with each other
    double bytes_moved = 0;
    double energy = 0;
};

namespace detail {
inline constexpr double kTieTolerance = 1e-12;

// True if candidate (time t, unit a) beats incumbent (time s, unit b).
inline bool better(double t, const UnitSpec& a, std::size_t ia, double s, const UnitSpec& b, std::size_t ib,
                   const KernelDescriptor& k) {
    const double scale = std::max(std::fabs(t), std::fabs(s));
    if (std::fabs(t - s) > kTieTolerance * scale)
        return t < s;
    if (is_resident(k, a) != is_resident(k, b))
        return is_resident(k, a);
    if (a.cls != b.cls)
        return a.cls < b.cls;
    return ia < ib;
}
} // namespace detail

// Index of the unit `k` goes to: minimum modeled time among units that can
// hold its data; ties go to the resident unit, then the lower-power class,
// then the earlier unit.
inline std::size_t best_unit(const KernelDescriptor& k, const std::vector<UnitSpec>& units) {
    std::size_t best = units.size();
    double best_t = 0;
    for (std::size_t i = 0; i < units.size(); ++i) {
        if (units[i].capacity < k.bytes_touched)
            continue;
        const double t = roofline_time(k, units[i]);
        if (best == units.size() || detail::better(t, units[i], i, best_t, units[best], best, k)) {
            best = i;
            best_t = t;
        }
    }
    if (best == units.size())
        throw CapacityError("kernel " + k.name + " (" + std::to_string(k.bytes_touched) +
                            " bytes) fits in no unit");
    return best;
}

// Online greedy placement in kernel arrival order.
inline Placement papi_schedule(const std::vector<KernelDescriptor>& kernels, const std::vector<UnitSpec>& units) {
    validate_units(units);
    Placement p;
    std::vector<double> busy(units.size(), 0.0);
    for (const auto& k : kernels) {
        k.validate();
        const std::size_t u = best_unit(k, units);
        const auto tb = roofline_breakdown(k, units[u]);
        Assignment a{k.name, units[u].name, tb.total(), energy(k, units[u]),
                     is_resident(k, units[u]) ? 0.0 : k.bytes_touched, tb.bound()};
        busy[u] += a.time;
        p.bytes_moved += a.bytes_moved;
        p.energy += a.energy;
        p.assignments.push_back(std::move(a));
    }
    for (double b : busy)
        p.makespan = std::max(p.makespan, b);
    return p;
}

struct ScalingPoint {
    std::uint32_t units = 1;
    double throughput = 0; // ops/s
    double ratio = 1;      // throughput / throughput at one unit
};

// Throughput of `k` split evenly over n copies of `base`.  Resident data
// scales with the units, so throughput grows linearly; a host-fed kernel
// streams its bytes over the single host link of `base` and saturates at
// link_bandwidth * arithmetic intensity.
inline std::vector<ScalingPoint> scaling_curve(const UnitSpec& base, const KernelDescriptor& k, std::uint32_t max_units,
                                               bool host_fed = false) {
    base.validate();
    k.validate();
    if (max_units < 1)
        throw ConfigError("scaling_curve: max_units >= 1");
    const double one = k.compute_ops / std::max(k.compute_ops / base.peak_compute, k.bytes_touched / base.mem_bandwidth);
    const double link_cap = base.link_bandwidth * k.arithmetic_intensity();
    std::vector<ScalingPoint> out;
    const double t1 = host_fed ? std::min(one, link_cap) : one;
    for (std::uint32_t n = 1; n <= max_units; ++n) {
        double thr = static_cast<double>(n) * one;
        if (host_fed)
            thr = std::min(thr, link_cap);
        out.push_back({n, thr, thr / t1});
    }
    return out;
}

} // namespace memcentric::pnm
