#pragma once

#include <cstdint>
#include <optional>

#include "memcentric/common/bit_row.hpp"
#include "memcentric/dram/types.hpp"

namespace memcentric {

struct RowState {
    BitRow data;
    std::uint32_t act_counter = 0;   // activations since the last counter reset
    double disturbance = 0.0;        // weighted aggressor activity since last refresh
    double acmin_base = 1.0;
    double acmin_current = 1.0;      // base after per-window variation
    Cycle last_refresh_cycle = 0;

    friend bool operator==(const RowState&, const RowState&) = default;
};

// Single row buffer per bank.
struct BankState {
    std::optional<std::uint32_t> open_row; // bank-local row (DramGeometry::bank_row)
    Cycle open_since = 0;
    Cycle closed_at = 0;

    friend bool operator==(const BankState&, const BankState&) = default;
};

} // namespace memcentric
