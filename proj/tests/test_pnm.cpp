#include <gtest/gtest.h>

#include <limits>

#include "memcentric/common/random.hpp"
#include "memcentric/pnm/model.hpp"

using namespace memcentric;
using namespace memcentric::pnm;

namespace {

UnitSpec unit(std::string name, UnitClass cls, double peak, double bw, double cap = 1e12, double link = 1e10) {
    UnitSpec u;
    u.name = std::move(name);
    u.cls = cls;
    u.peak_compute = peak;
    u.mem_bandwidth = bw;
    u.capacity = cap;
    u.link_bandwidth = link;
    return u;
}

KernelDescriptor kernel(std::string name, double ops, double bytes, std::string resident = "") {
    return {std::move(name), ops, bytes, std::move(resident)};
}

// Three-way unit set shaped like the shipped serving configuration.
std::vector<UnitSpec> serving_units() {
    return {unit("fc0", UnitClass::FC_PIM, 4e12, 1e12, 16e9, 64e9), unit("attn0", UnitClass::ATTN_PIM, 2e12, 2.048e12, 64e9, 64e9),
            unit("pu0", UnitClass::PU, 100e12, 3e12, 80e9, 64e9)};
}

// Independent reference: time each unit directly and pick the fastest that
// fits, with the documented tie order.
std::string exhaustive_best(const KernelDescriptor& k, const std::vector<UnitSpec>& units) {
    std::string best;
    double best_t = std::numeric_limits<double>::infinity();
    int best_rank = 0;
    for (std::size_t i = 0; i < units.size(); ++i) {
        const UnitSpec& u = units[i];
        if (u.capacity < k.bytes_touched)
            continue;
        const bool resident = k.resident_unit == u.name;
        double t = std::max(k.compute_ops / u.peak_compute, k.bytes_touched / u.mem_bandwidth);
        if (!resident)
            t += k.bytes_touched / u.link_bandwidth;
        // Lower rank wins ties: resident first, then class, then index.
        const int rank = (resident ? 0 : 1000) + static_cast<int>(u.cls) * 100 + static_cast<int>(i);
        if (t < best_t * (1 - 1e-12) || (t <= best_t * (1 + 1e-12) && rank < best_rank)) {
            best = u.name;
            best_t = t;
            best_rank = rank;
        }
    }
    return best;
}

} // namespace

TEST(Roofline, ReferencePoints) {
    const KernelDescriptor k = kernel("k", 1e9, 1e9, "u");
    EXPECT_DOUBLE_EQ(roofline_time(k, unit("u", UnitClass::PU, 1e12, 1e11)), 10e-3);
    EXPECT_EQ(roofline_breakdown(k, unit("u", UnitClass::PU, 1e12, 1e11)).bound(), Bound::memory);
    EXPECT_DOUBLE_EQ(roofline_time(k, unit("u", UnitClass::PU, 1e12, 1e12)), 1e-3);
    const KernelDescriptor remote = kernel("k", 1e9, 1e9, "elsewhere");
    const auto tb = roofline_breakdown(remote, unit("u", UnitClass::PU, 1e12, 1e11, 1e12, 1e10));
    EXPECT_DOUBLE_EQ(tb.total(), 110e-3);
    EXPECT_EQ(tb.bound(), Bound::transfer);
}

TEST(Roofline, MoreBandwidthNeverSlower) {
    Rng rng(21);
    for (int i = 0; i < 1000; ++i) {
        const KernelDescriptor k = kernel("k", 1e6 + double(rng.below(1'000'000'000)), 1e6 + double(rng.below(1'000'000'000)),
                                          rng.below(2) ? "u" : "");
        UnitSpec u = unit("u", UnitClass::PU, 1e9 + double(rng.below(1'000'000'000'000ULL)), 1e9 + double(rng.below(1'000'000'000'000ULL)));
        const double before = roofline_time(k, u);
        u.mem_bandwidth *= 1.0 + double(rng.below(100)) / 10.0;
        EXPECT_LE(roofline_time(k, u), before);
    }
}

TEST(Units, ValidationCatchesBadSpecs) {
    EXPECT_THROW(unit("u", UnitClass::PU, 0, 1).validate(), ConfigError);
    EXPECT_THROW(validate_units({unit("a", UnitClass::PU, 1, 1), unit("a", UnitClass::PU, 1, 1)}), ConfigError);
    EXPECT_THROW(validate_units({unit("f", UnitClass::FC_PIM, 1, 1, 100), unit("a", UnitClass::ATTN_PIM, 1, 1, 50)}),
                 ConfigError);
    EXPECT_THROW(kernel("k", 0, 1).validate(), ConfigError);
}

TEST(Schedule, AttentionGoesToAttentionUnitDenseToProcessor) {
    const auto units = serving_units();
    const KernelDescriptor attn = kernel("attention", 1.6e10, 3.2e10, "attn0");
    const KernelDescriptor fc = kernel("fc", 2e11, 1e9, "fc0");
    ASSERT_DOUBLE_EQ(attn.arithmetic_intensity(), 0.5);
    ASSERT_DOUBLE_EQ(fc.arithmetic_intensity(), 200.0);
    const Placement p = papi_schedule({attn, fc}, units);
    ASSERT_EQ(p.assignments.size(), 2u);
    EXPECT_EQ(p.assignments[0].unit, "attn0");
    EXPECT_EQ(p.assignments[0].bound, Bound::memory);
    EXPECT_EQ(p.assignments[1].unit, "pu0");
    EXPECT_EQ(p.assignments[0].unit, exhaustive_best(attn, units));
    EXPECT_EQ(p.assignments[1].unit, exhaustive_best(fc, units));
    EXPECT_DOUBLE_EQ(p.bytes_moved, 1e9);
    EXPECT_DOUBLE_EQ(p.makespan, std::max(p.assignments[0].time, p.assignments[1].time));
}

TEST(Schedule, SingleUnitTakesEverything) {
    const std::vector<UnitSpec> one = {unit("only", UnitClass::FC_PIM, 1e9, 1e9)};
    for (double ai : {0.01, 1.0, 1000.0}) {
        const Placement p = papi_schedule({kernel("k", ai * 1e6, 1e6)}, one);
        EXPECT_EQ(p.assignments[0].unit, "only");
    }
}

TEST(Schedule, MakespanSumsPerUnit) {
    const std::vector<UnitSpec> one = {unit("only", UnitClass::PU, 1e9, 1e9)};
    const Placement p = papi_schedule({kernel("a", 1e9, 1, "only"), kernel("b", 2e9, 1, "only")}, one);
    EXPECT_DOUBLE_EQ(p.makespan, 3.0);
}

TEST(Schedule, TiesPreferResidentThenLowerPowerClass) {
    const std::vector<UnitSpec> same = {unit("pu", UnitClass::PU, 1e9, 1e9), unit("attn", UnitClass::ATTN_PIM, 1e9, 1e9),
                                        unit("fc", UnitClass::FC_PIM, 1e9, 1e9)};
    // Nothing resident: all equal, FC_PIM wins.
    EXPECT_EQ(papi_schedule({kernel("k", 1e6, 1e6, "nowhere")}, same).assignments[0].unit, "fc");
    // A near-infinite link makes the transfer term vanish below the tie tolerance.
    EXPECT_EQ(papi_schedule({kernel("k", 1e6, 1e6, "pu")}, {unit("pu", UnitClass::PU, 1e9, 1e9, 1e12, 1e30),
                                                              unit("fc", UnitClass::FC_PIM, 1e9, 1e9, 1e12, 1e30)})
                  .assignments[0]
                  .unit,
              "pu");
}

TEST(Schedule, MatchesExhaustiveSearchOnRandomUnitSets) {
    Rng rng(4);
    const auto draw = [&](double lo, double decades) { return lo * std::pow(10.0, double(rng.below(1000)) / 1000.0 * decades); };
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<UnitSpec> units;
        const int n = 1 + int(rng.below(5));
        for (int i = 0; i < n; ++i) {
            const auto cls = static_cast<UnitClass>(rng.below(3));
            units.push_back(unit("u" + std::to_string(i), cls, draw(1e9, 5), draw(1e9, 4), draw(1e9, 3), draw(1e9, 3)));
        }
        // Keep the capacity invariant by giving attention units the largest capacity.
        double max_fc = 0;
        for (const auto& u : units)
            if (u.cls == UnitClass::FC_PIM)
                max_fc = std::max(max_fc, u.capacity);
        for (auto& u : units)
            if (u.cls == UnitClass::ATTN_PIM)
                u.capacity = std::max(u.capacity, max_fc);
        const KernelDescriptor k =
            kernel("k", draw(1e6, 6), draw(1e6, 3), rng.below(2) ? units[rng.below(units.size())].name : "");
        const Placement p = papi_schedule({k}, units);
        ASSERT_EQ(p.assignments[0].unit, exhaustive_best(k, units)) << "trial " << trial;
    }
}

TEST(Schedule, ScalingComputeAndBandwidthKeepsTheChoice) {
    Rng rng(5);
    const auto units = serving_units();
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<KernelDescriptor> ks;
        for (int i = 0; i < 6; ++i)
            ks.push_back(kernel("k" + std::to_string(i), 1e6 * double(1 + rng.below(100000)), 1e6 * double(1 + rng.below(10000)),
                                rng.below(2) ? "attn0" : ""));
        const double c = double(2 + rng.below(50));
        auto scaled = units;
        for (auto& u : scaled) {
            u.peak_compute *= c;
            u.mem_bandwidth *= c;
            u.link_bandwidth *= c;
        }
        const Placement a = papi_schedule(ks, units), b = papi_schedule(ks, scaled);
        for (std::size_t i = 0; i < ks.size(); ++i)
            ASSERT_EQ(a.assignments[i].unit, b.assignments[i].unit);
        EXPECT_NEAR(b.makespan * c, a.makespan, 1e-9 * a.makespan);
    }
}

TEST(Schedule, OversizedKernelIsACapacityError) {
    try {
        papi_schedule({kernel("huge", 1, 1e15)}, serving_units());
        FAIL() << "expected CapacityError";
    } catch (const CapacityError& e) {
        EXPECT_NE(std::string(e.what()).find("huge"), std::string::npos);
    }
}

TEST(Scaling, ResidentBandwidthBoundIsExactlyLinear) {
    const UnitSpec attn = serving_units()[1];
    const KernelDescriptor k = kernel("attention", 1.6e10, 3.2e10, "attn0");
    const auto curve = scaling_curve(attn, k, 64);
    ASSERT_EQ(curve.size(), 64u);
    for (const auto& p : curve)
        EXPECT_EQ(p.ratio, double(p.units)) << p.units;
    EXPECT_EQ(curve[0].ratio, 1.0);
    EXPECT_EQ(curve[7].throughput / curve[0].throughput, 8.0);
}

TEST(Scaling, HostFedKernelSaturatesAtTheLink) {
    // Link equals one unit's memory bandwidth, so at n=10 it is a tenth of the aggregate.
    const UnitSpec u = unit("u", UnitClass::PU, 1e12, 1e10, 1e12, 1e10);
    const KernelDescriptor k = kernel("k", 1e9, 1e10);
    const auto curve = scaling_curve(u, k, 10, true);
    for (const auto& p : curve)
        EXPECT_NEAR(p.ratio, 1.0, 0.01) << p.units;
    EXPECT_DOUBLE_EQ(curve.back().throughput, u.link_bandwidth * k.arithmetic_intensity());
    EXPECT_THROW(scaling_curve(u, k, 0), ConfigError);
}
