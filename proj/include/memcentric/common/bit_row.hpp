#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "memcentric/common/error.hpp"

namespace memcentric {

// Fixed-width bit vector holding the contents of one DRAM row.  Column j is
// bit (j % 64) of word (j / 64).  Bits beyond size() are kept zero.
class BitRow {
  public:
    BitRow() = default;

    explicit BitRow(std::size_t nbits, bool value = false)
        : nbits_(nbits), words_((nbits + 63) / 64, value ? ~std::uint64_t{0} : 0) {
        trim();
    }

    std::size_t size() const noexcept { return nbits_; }
    std::size_t word_count() const noexcept { return words_.size(); }

    std::span<const std::uint64_t> words() const noexcept { return words_; }
    std::span<std::uint64_t> words() noexcept { return words_; }

    bool get(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1u; }

    void set(std::size_t i, bool v) noexcept {
        const std::uint64_t m = std::uint64_t{1} << (i & 63);
        if (v)
            words_[i >> 6] |= m;
        else
            words_[i >> 6] &= ~m;
    }

    void flip(std::size_t i) noexcept { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

    void fill(bool v) noexcept {
        std::fill(words_.begin(), words_.end(), v ? ~std::uint64_t{0} : 0);
        trim();
    }

    std::size_t count() const noexcept {
        std::size_t n = 0;
        for (auto w : words_)
            n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }

    BitRow& operator&=(const BitRow& o) {
        check_width(o);
        for (std::size_t k = 0; k < words_.size(); ++k)
            words_[k] &= o.words_[k];
        return *this;
    }
    BitRow& operator|=(const BitRow& o) {
        check_width(o);
        for (std::size_t k = 0; k < words_.size(); ++k)
            words_[k] |= o.words_[k];
        return *this;
    }
    BitRow& operator^=(const BitRow& o) {
        check_width(o);
        for (std::size_t k = 0; k < words_.size(); ++k)
            words_[k] ^= o.words_[k];
        return *this;
    }

    friend BitRow operator&(BitRow a, const BitRow& b) { return a &= b; }
    friend BitRow operator|(BitRow a, const BitRow& b) { return a |= b; }
    friend BitRow operator^(BitRow a, const BitRow& b) { return a ^= b; }

    BitRow operator~() const {
        BitRow r = *this;
        for (auto& w : r.words_)
            w = ~w;
        r.trim();
        return r;
    }

    // Number of columns in which the two rows differ.
    std::size_t hamming(const BitRow& o) const {
        check_width(o);
        std::size_t n = 0;
        for (std::size_t k = 0; k < words_.size(); ++k)
            n += static_cast<std::size_t>(std::popcount(words_[k] ^ o.words_[k]));
        return n;
    }

    // Copies columns [begin, end) of src into this row; other columns keep
    // their value.
    void assign_columns(const BitRow& src, std::size_t begin, std::size_t end) {
        check_width(src);
        for (std::size_t j = begin; j < end; ++j)
            set(j, src.get(j));
    }

    friend bool operator==(const BitRow&, const BitRow&) = default;

    // Hex text, most significant nibble first: the last hex digit holds
    // columns 0..3.  An optional 0x prefix and '_' separators are accepted;
    // shorter strings are zero-extended.
    static BitRow from_hex(std::string_view hex, std::size_t nbits) {
        if (hex.size() >= 2 && hex[0] == '0' && (hex[1] == 'x' || hex[1] == 'X'))
            hex.remove_prefix(2);
        BitRow r(nbits);
        std::size_t bit = 0;
        for (auto it = hex.rbegin(); it != hex.rend(); ++it) {
            const char c = *it;
            if (c == '_')
                continue;
            int v;
            if (c >= '0' && c <= '9')
                v = c - '0';
            else if (c >= 'a' && c <= 'f')
                v = c - 'a' + 10;
            else if (c >= 'A' && c <= 'F')
                v = c - 'A' + 10;
            else
                throw ConfigError(std::string("invalid hex digit '") + c + "'");
            for (int b = 0; b < 4; ++b, ++bit) {
                if ((v >> b) & 1) {
                    if (bit >= nbits)
                        throw ConfigError("hex payload wider than " + std::to_string(nbits) + " bits");
                    r.set(bit, true);
                }
            }
        }
        return r;
    }

    std::string to_hex() const {
        static constexpr char digits[] = "0123456789abcdef";
        const std::size_t nibbles = (nbits_ + 3) / 4;
        std::string s(nibbles, '0');
        for (std::size_t n = 0; n < nibbles; ++n) {
            int v = 0;
            for (int b = 0; b < 4; ++b) {
                const std::size_t i = n * 4 + static_cast<std::size_t>(b);
                if (i < nbits_ && get(i))
                    v |= 1 << b;
            }
            s[nibbles - 1 - n] = digits[v];
        }
        return s;
    }

  private:
    void trim() noexcept {
        if (nbits_ % 64 != 0 && !words_.empty())
            words_.back() &= (std::uint64_t{1} << (nbits_ % 64)) - 1;
    }

    void check_width(const BitRow& o) const {
        if (o.nbits_ != nbits_)
            throw CapacityError("row width mismatch: " + std::to_string(nbits_) + " vs " +
                                std::to_string(o.nbits_));
    }

    std::size_t nbits_ = 0;
    std::vector<std::uint64_t> words_;
};

// Bitwise three-input majority.
inline BitRow majority(const BitRow& a, const BitRow& b, const BitRow& c) {
    return (a & b) | (b & c) | (a & c);
}

} // namespace memcentric
