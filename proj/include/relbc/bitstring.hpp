#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace relbc::bitmath {

/// Fixed-length bit string, bit index 0 first. Packed into 64-bit words;
/// all binary operations require equal lengths and throw otherwise.
class BitString {
  public:
    BitString() = default;
    explicit BitString(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

    static BitString zeros(std::size_t n) { return BitString(n); }
    static BitString ones(std::size_t n);
    static BitString random(std::size_t n, std::mt19937_64& eng);
    /// Low n bits of value, bit j of value -> index j. Requires n <= 64.
    static BitString from_bits(std::uint64_t value, std::size_t n);
    /// Parse "0101..."; index 0 is the leftmost character.
    static BitString parse(const std::string& text);

    std::size_t size() const { return n_; }
    bool empty() const { return n_ == 0; }

    bool get(std::size_t i) const;
    void set(std::size_t i, bool v);
    void flip(std::size_t i);

    std::size_t weight() const;  // popcount
    std::uint64_t to_bits() const;  // requires size() <= 64

    BitString operator^(const BitString& other) const;
    BitString operator&(const BitString& other) const;
    BitString operator~() const;
    BitString& operator^=(const BitString& other);

    bool operator==(const BitString&) const = default;

    std::string str() const;  // "0101..."

  private:
    void check_same_size(const BitString& other, const char* op) const;
    void mask_tail();

    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Number of positions where a and b differ; requires equal lengths.
std::size_t hamming_distance(const BitString& a, const BitString& b);

}  // namespace relbc::bitmath
