#pragma once

#include <array>
#include <cstdint>

#include "rtnc/errors.hpp"

namespace rtnc {

// GF(2^w) arithmetic for payload symbols, w in [1,16].
//
// Elements are w-bit integers in polynomial representation over a fixed
// primitive polynomial per width (the lexicographically smallest one, found
// by search and cached). Addition is XOR.
class Field {
public:
    explicit Field(int width);

    int width() const { return width_; }
    uint32_t poly() const { return poly_; }
    uint16_t mask() const { return static_cast<uint16_t>((1u << width_) - 1u); }

    static uint16_t add(uint16_t x, uint16_t y) { return x ^ y; }
    uint16_t mul(uint16_t x, uint16_t y) const;
    uint16_t pow(uint16_t x, uint32_t e) const;
    uint16_t inv(uint16_t x) const;

    // Lexicographically smallest primitive polynomial of the given degree,
    // returned with the leading x^width term included.
    static uint32_t primitive_poly(int width);

private:
    int width_;
    uint32_t poly_;
};

// The two nonzero coefficient triplets of the star scheme. Valid when every
// 2x2 minor [a_i a_j; b_i b_j] is nonsingular.
struct CoeffTriplets {
    std::array<uint16_t, 3> a;
    std::array<uint16_t, 3> b;
};

bool triplets_valid(const Field& f, const CoeffTriplets& t);

// Deterministic triplets: a = [1,1,1], b = [1,2,3]. Requires width >= 2;
// GF(2) has a single nonzero element so no valid pair exists there.
CoeffTriplets choose_triplets(const Field& f);

}  // namespace rtnc
