#pragma once

#include <bit>
#include <cstdint>
#include <utility>
#include <vector>

namespace keypos {

/// Fixed-length bit string packed into 64-bit words, LSB-first within a word.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::size_t bitCount)
        : bitCount_(bitCount), words_((bitCount + 63) / 64, 0) {}
    BitVector(std::size_t bitCount, std::vector<std::uint64_t> words)
        : bitCount_(bitCount), words_(std::move(words))
    {
        words_.resize((bitCount + 63) / 64, 0);
    }

    std::size_t size() const { return bitCount_; }
    bool empty() const { return bitCount_ == 0; }

    bool test(std::size_t i) const
    {
        return (words_[i >> 6] >> (i & 63)) & 1ULL;
    }
    void set(std::size_t i, bool v = true)
    {
        const std::uint64_t mask = 1ULL << (i & 63);
        if (v)
            words_[i >> 6] |= mask;
        else
            words_[i >> 6] &= ~mask;
    }

    std::size_t popcount() const
    {
        std::size_t n = 0;
        for (std::uint64_t w : words_)
            n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }

    const std::vector<std::uint64_t>& words() const { return words_; }
    std::vector<std::uint64_t>& words() { return words_; }

    bool operator==(const BitVector& o) const
    {
        return bitCount_ == o.bitCount_ && words_ == o.words_;
    }

    /// Popcount of XOR. Both vectors must have the same length.
    static std::size_t hamming(const BitVector& a, const BitVector& b)
    {
        std::size_t n = 0;
        for (std::size_t i = 0; i < a.words_.size(); ++i)
            n += static_cast<std::size_t>(std::popcount(a.words_[i] ^ b.words_[i]));
        return n;
    }

private:
    std::size_t bitCount_ = 0;
    std::vector<std::uint64_t> words_;
};

} // namespace keypos
