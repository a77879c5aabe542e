#include <gtest/gtest.h>

#include "memcentric/pud/exec.hpp"
#include "memcentric/pud/layout.hpp"

using namespace memcentric;
using namespace memcentric::pud;

namespace {

DramGeometry geometry(std::uint32_t columns = 1024) {
    DramGeometry g;
    g.banks_per_rank = 1;
    g.subarrays_per_bank = 2;
    g.rows_per_subarray = 64;
    g.columns_per_row = columns;
    return g;
}

RowAddress r(std::uint32_t row, std::uint32_t sa = 0) { return {0, 0, 0, sa, row}; }

BitRow random_row(Rng& rng, std::uint32_t n) {
    BitRow b(n);
    for (std::uint32_t j = 0; j < n; ++j)
        b.set(j, rng.next() & 1);
    return b;
}

} // namespace

TEST(MicroOp, ValidationRejectsMalformedOps) {
    const DramGeometry g = geometry();
    EXPECT_THROW(validate(MicroOp::rowclone(r(0), r(1, 1)), g), AddressError);
    EXPECT_THROW(validate(MicroOp::rowclone(r(0), r(0)), g), ConfigError);
    EXPECT_THROW(validate(MicroOp::tra_maj(r(0), r(0), r(1)), g), ConfigError);
    std::vector<RowAddress> many;
    for (std::uint32_t i = 1; i <= 32; ++i)
        many.push_back(r(i));
    EXPECT_THROW(validate(MicroOp::multi_copy(r(0), many), g), ConfigError);
    many.pop_back();
    EXPECT_NO_THROW(validate(MicroOp::multi_copy(r(0), many), g));
    std::vector<RowAddress> inputs(many.begin(), many.begin() + 17);
    EXPECT_THROW(validate(MicroOp::multi_input(LogicOp::AND, inputs, r(40)), g), ConfigError);
    inputs.pop_back();
    EXPECT_NO_THROW(validate(MicroOp::multi_input(LogicOp::AND, inputs, r(40)), g));
    EXPECT_THROW(validate(MicroOp::simul_act({r(0), r(1), r(2)}), g), ConfigError);
    EXPECT_THROW(validate(MicroOp::rowclone(r(0), r(64)), g), AddressError);
}

TEST(MicroOp, ListingIsReadable) {
    EXPECT_EQ(to_string(MicroOp::rowclone(r(3), r(9))), "ROWCLONE r3 -> r9");
    EXPECT_EQ(to_string(MicroOp::tra_maj(r(1), r(2), r(3))), "TRA_MAJ r1 r2 r3");
    EXPECT_EQ(to_string(MicroOp::multi_input(LogicOp::NOR, {r(1), r(2)}, r(5))), "MULTI_INPUT NOR r1 r2 -> r5");
    EXPECT_EQ(to_string(MicroOp::set_const(r(4), true)), "SET_CONST r4 = 1");
}

TEST(Exec, TripleActivationMatchesMajorityTruthTable) {
    Device d(geometry(8), {}, 1);
    PudEngine e(d);
    BitRow a(8), b(8), c(8);
    for (std::uint32_t v = 0; v < 8; ++v) {
        a.set(v, v & 1);
        b.set(v, v & 2);
        c.set(v, v & 4);
    }
    d.poke_row(r(0), a);
    d.poke_row(r(1), b);
    d.poke_row(r(2), c);
    e.exec(MicroOp::tra_maj(r(0), r(1), r(2)));
    for (std::uint32_t row = 0; row < 3; ++row)
        for (std::uint32_t v = 0; v < 8; ++v) {
            const int ones = int(bool(v & 1)) + int(bool(v & 2)) + int(bool(v & 4));
            EXPECT_EQ(d.peek_row(r(row)).get(v), ones >= 2) << "row " << row << " case " << v;
        }
}

TEST(Exec, AndOrFromMajorityWithConstants) {
    Device d(geometry(), {}, 1);
    PudEngine e(d);
    Rng rng(8);
    const BitRow a = random_row(rng, 1024), b = random_row(rng, 1024);
    for (const bool c : {false, true}) {
        d.poke_row(r(0), a);
        d.poke_row(r(1), b);
        e.exec(MicroOp::set_const(r(2), c));
        e.exec(MicroOp::tra_maj(r(0), r(1), r(2)));
        for (std::uint32_t j = 0; j < 1024; ++j)
            ASSERT_EQ(d.peek_row(r(2)).get(j), c ? (a.get(j) || b.get(j)) : (a.get(j) && b.get(j)));
    }
}

TEST(Exec, NandNorFromMajorityAndNot) {
    Device d(geometry(), {}, 1);
    PudEngine e(d);
    Rng rng(9);
    const BitRow a = random_row(rng, 1024), b = random_row(rng, 1024);
    for (const bool c : {false, true}) {
        d.poke_row(r(0), a);
        d.poke_row(r(1), b);
        e.exec(MicroOp::set_const(r(2), c));
        e.exec(MicroOp::tra_maj(r(0), r(1), r(2)));
        e.exec(MicroOp::bit_not(r(2), r(3)));
        for (std::uint32_t j = 0; j < 1024; ++j)
            ASSERT_EQ(d.peek_row(r(3)).get(j), c ? !(a.get(j) || b.get(j)) : !(a.get(j) && b.get(j)));
    }
}

TEST(Exec, MultiInputLogicMatchesFold) {
    Device d(geometry(), {}, 1);
    PudEngine e(d);
    Rng rng(10);
    for (std::uint32_t k : {2u, 3u, 7u, 16u}) {
        std::vector<BitRow> ins;
        std::vector<RowAddress> addrs;
        for (std::uint32_t i = 0; i < k; ++i) {
            ins.push_back(random_row(rng, 1024));
            d.poke_row(r(i), ins.back());
            addrs.push_back(r(i));
        }
        for (LogicOp op : {LogicOp::AND, LogicOp::NAND, LogicOp::OR, LogicOp::NOR}) {
            e.exec(MicroOp::multi_input(op, addrs, r(40)));
            for (std::uint32_t j = 0; j < 1024; ++j) {
                bool all = true, any = false;
                for (const auto& x : ins) {
                    all = all && x.get(j);
                    any = any || x.get(j);
                }
                const bool expect = op == LogicOp::AND ? all : op == LogicOp::NAND ? !all : op == LogicOp::OR ? any : !any;
                ASSERT_EQ(d.peek_row(r(40)).get(j), expect) << to_string(op) << " k=" << k;
            }
        }
    }
}

TEST(Exec, MultiCopyFillsEveryDestination) {
    Device d(geometry(), {}, 1);
    PudEngine e(d);
    Rng rng(11);
    const BitRow src = random_row(rng, 1024);
    d.poke_row(r(0), src);
    std::vector<RowAddress> dsts;
    for (std::uint32_t i = 1; i <= 31; ++i)
        dsts.push_back(r(i));
    e.exec(MicroOp::multi_copy(r(0), dsts));
    for (const auto& x : dsts)
        EXPECT_EQ(d.peek_row(x), src);
}

TEST(Exec, CopyNoiseMatchesConfiguredRate) {
    Device d(geometry(), {}, 1);
    NoiseModel n;
    n.enabled = true;
    PudEngine e(d, n);
    const BitRow zero(1024);
    std::uint64_t bits = 0, wrong = 0;
    while (bits < 1'000'000) {
        d.poke_row(r(0), zero);
        e.exec(MicroOp::rowclone(r(0), r(1)));
        wrong += d.peek_row(r(1)).count();
        bits += 1024;
    }
    const double correct = 1.0 - double(wrong) / double(bits);
    EXPECT_GE(correct, 0.9996);
    EXPECT_LE(correct, 0.99995);
    EXPECT_EQ(e.stats().bits[0], bits);
    EXPECT_EQ(e.stats().flipped[0], wrong);
}

TEST(Exec, LogicNoiseWithinBinomialBounds) {
    Device d(geometry(), {}, 2);
    NoiseModel n;
    n.enabled = true;
    PudEngine e(d, n);
    for (int i = 0; i < 200; ++i) {
        e.exec(MicroOp::tra_maj(r(0), r(1), r(2)));
        e.exec(MicroOp::bit_not(r(5), r(6)));
    }
    // 614400 logic bits, 204800 NOT bits; 4 sigma of p(1-p)/n.
    const double sl = e.stats().success_rate(NoiseClass::logic), sn = e.stats().success_rate(NoiseClass::bit_not);
    EXPECT_NEAR(sl, 0.94, 4 * std::sqrt(0.94 * 0.06 / 614400));
    EXPECT_NEAR(sn, 0.94, 4 * std::sqrt(0.94 * 0.06 / 204800));
}

TEST(Exec, LaneMaskLeavesOtherColumnsAlone) {
    Device d(geometry(64), {}, 1);
    PudEngine e(d, {}, LaneMask{8, 24});
    d.poke_row(r(0), BitRow(64, true));
    e.exec(MicroOp::rowclone(r(0), r(1)));
    const BitRow& out = d.peek_row(r(1));
    for (std::uint32_t j = 0; j < 64; ++j)
        EXPECT_EQ(out.get(j), j >= 8 && j < 24) << j;
    PudEngine bad(d, {}, LaneMask{8, 65});
    EXPECT_THROW(bad.exec(MicroOp::rowclone(r(0), r(1))), CapacityError);
}

TEST(Exec, SimultaneousActivationIsSeededRandom) {
    const auto run = [](std::uint64_t seed) {
        Device d(geometry(), {}, seed);
        PudEngine e(d);
        e.exec(MicroOp::simul_act({r(0), r(1), r(2), r(3)}));
        return d.peek_row(r(2));
    };
    EXPECT_EQ(run(5), run(5));
    EXPECT_NE(run(5), run(6));
    const BitRow x = run(5);
    EXPECT_NEAR(double(x.count()) / 1024, 0.5, 0.08);
}

TEST(Exec, OccupiesTheChannelAndRespectsOpenRows) {
    Device d(geometry(), {}, 1);
    PudEngine e(d);
    e.exec(MicroOp::tra_maj(r(0), r(1), r(2)));
    EXPECT_EQ(d.now(), d.timing().tRAS + d.timing().tRP);
    e.exec(MicroOp::rowclone(r(0), r(1)));
    EXPECT_EQ(d.now(), 2 * (d.timing().tRAS + d.timing().tRP) + d.timing().tRAS);
    d.issue(Command::act(r(5), d.now()));
    EXPECT_THROW(e.exec(MicroOp::rowclone(r(0), r(1))), ProtocolError);
}

TEST(Layout, LittleEndianBitRows) {
    const auto rows = transpose_in({1}, 4, 8);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_TRUE(rows[0].get(0));
    EXPECT_FALSE(rows[1].get(0));
    EXPECT_FALSE(rows[2].get(0));
    EXPECT_FALSE(rows[3].get(0));
}

TEST(Layout, RoundTrip) {
    Rng rng(12);
    std::vector<std::uint64_t> v(1024);
    for (auto& x : v)
        x = rng.below(256);
    EXPECT_EQ(transpose_out(transpose_in(v, 8, 1024), v.size()), v);
    std::vector<std::uint64_t> w(100);
    for (auto& x : w)
        x = rng.next();
    EXPECT_EQ(transpose_out(transpose_in(w, 64, 128), w.size()), w);
}

TEST(Layout, CapacityErrors) {
    EXPECT_THROW(transpose_in(std::vector<std::uint64_t>(9, 0), 4, 8), CapacityError);
    EXPECT_THROW(transpose_in({16}, 4, 8), CapacityError);
    EXPECT_THROW(transpose_in({1}, 8, 8, 4), CapacityError);
}
