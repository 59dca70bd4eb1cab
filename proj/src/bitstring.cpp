#include "relbc/bitstring.hpp"

#include <bit>
#include <stdexcept>

namespace relbc::bitmath {

BitString BitString::ones(std::size_t n) {
    BitString s(n);
    for (auto& w : s.words_) w = ~0ULL;
    s.mask_tail();
    return s;
}

BitString BitString::random(std::size_t n, std::mt19937_64& eng) {
    BitString s(n);
    for (auto& w : s.words_) w = eng();
    s.mask_tail();
    return s;
}

BitString BitString::from_bits(std::uint64_t value, std::size_t n) {
    if (n > 64) throw std::invalid_argument("BitString::from_bits: n must be <= 64");
    BitString s(n);
    if (n > 0) s.words_[0] = (n == 64) ? value : (value & ((1ULL << n) - 1));
    return s;
}

BitString BitString::parse(const std::string& text) {
    BitString s(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '1') {
            s.set(i, true);
        } else if (text[i] != '0') {
            throw std::invalid_argument("BitString::parse: expected only '0'/'1'");
        }
    }
    return s;
}

bool BitString::get(std::size_t i) const {
    if (i >= n_) throw std::out_of_range("BitString::get: index out of range");
    return (words_[i / 64] >> (i % 64)) & 1ULL;
}

void BitString::set(std::size_t i, bool v) {
    if (i >= n_) throw std::out_of_range("BitString::set: index out of range");
    const std::uint64_t mask = 1ULL << (i % 64);
    if (v) {
        words_[i / 64] |= mask;
    } else {
        words_[i / 64] &= ~mask;
    }
}

void BitString::flip(std::size_t i) {
    if (i >= n_) throw std::out_of_range("BitString::flip: index out of range");
    words_[i / 64] ^= 1ULL << (i % 64);
}

std::size_t BitString::weight() const {
    std::size_t w = 0;
    for (auto word : words_) w += static_cast<std::size_t>(std::popcount(word));
    return w;
}

std::uint64_t BitString::to_bits() const {
    if (n_ > 64) throw std::logic_error("BitString::to_bits: string longer than 64 bits");
    return words_.empty() ? 0ULL : words_[0];
}

BitString BitString::operator^(const BitString& other) const {
    BitString r = *this;
    r ^= other;
    return r;
}

BitString& BitString::operator^=(const BitString& other) {
    check_same_size(other, "xor");
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] ^= other.words_[k];
    return *this;
}

BitString BitString::operator&(const BitString& other) const {
    check_same_size(other, "and");
    BitString r = *this;
    for (std::size_t k = 0; k < words_.size(); ++k) r.words_[k] &= other.words_[k];
    return r;
}

BitString BitString::operator~() const {
    BitString r = *this;
    for (auto& w : r.words_) w = ~w;
    r.mask_tail();
    return r;
}

std::string BitString::str() const {
    std::string out(n_, '0');
    for (std::size_t i = 0; i < n_; ++i) {
        if (get(i)) out[i] = '1';
    }
    return out;
}

void BitString::check_same_size(const BitString& other, const char* op) const {
    if (n_ != other.n_) {
        throw std::invalid_argument(std::string("BitString ") + op + ": length mismatch");
    }
}

void BitString::mask_tail() {
    if (n_ % 64 != 0 && !words_.empty()) {
        words_.back() &= (1ULL << (n_ % 64)) - 1;
    }
}

std::size_t hamming_distance(const BitString& a, const BitString& b) {
    return (a ^ b).weight();
}

}  // namespace relbc::bitmath
