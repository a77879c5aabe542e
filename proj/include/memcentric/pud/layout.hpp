#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "memcentric/common/bit_row.hpp"

namespace memcentric::pud {

// Vertical (bit-sliced) layout: bit i of element j lives in row i, column j.
// Row 0 holds the least significant bits.
inline std::vector<BitRow> transpose_in(const std::vector<std::uint64_t>& values, std::uint32_t bits,
                                        std::uint32_t columns,
                                        std::uint32_t max_rows = std::numeric_limits<std::uint32_t>::max()) {
    if (bits == 0 || bits > 64)
        throw CapacityError("element width " + std::to_string(bits) + " outside 1..64");
    if (bits > max_rows)
        throw CapacityError(std::to_string(bits) + "-bit elements need " + std::to_string(bits) + " rows, " +
                            std::to_string(max_rows) + " available");
    if (values.size() > columns)
        throw CapacityError(std::to_string(values.size()) + " elements exceed " + std::to_string(columns) + " lanes");
    std::vector<BitRow> rows(bits, BitRow(columns));
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (bits < 64 && (values[j] >> bits) != 0)
            throw CapacityError("value " + std::to_string(values[j]) + " does not fit in " + std::to_string(bits) +
                                " bits");
        for (std::uint32_t i = 0; i < bits; ++i)
            if ((values[j] >> i) & 1u)
                rows[i].set(j, true);
    }
    return rows;
}

inline std::vector<std::uint64_t> transpose_out(const std::vector<BitRow>& rows, std::size_t count) {
    if (rows.size() > 64)
        throw CapacityError("element width " + std::to_string(rows.size()) + " above 64");
    std::vector<std::uint64_t> values(count, 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (count > rows[i].size())
            throw CapacityError(std::to_string(count) + " elements exceed " + std::to_string(rows[i].size()) +
                                " lanes");
        for (std::size_t j = 0; j < count; ++j)
            if (rows[i].get(j))
                values[j] |= std::uint64_t{1} << i;
    }
    return values;
}

} // namespace memcentric::pud
