#include "rtnc/field.hpp"

#include <mutex>

namespace rtnc {

namespace {

// Multiply by x modulo poly (degree w).
uint32_t xtime(uint32_t v, uint32_t poly, int w) {
    v <<= 1;
    if (v >> w)
        v ^= poly;
    return v;
}

// Primitive iff the multiplicative order of x is exactly 2^w - 1.
bool is_primitive(uint32_t poly, int w) {
    if ((poly & 1u) == 0)
        return false;
    const uint32_t group = (1u << w) - 1u;
    uint32_t e = 1;
    for (uint32_t k = 1; k <= group; ++k) {
        e = xtime(e, poly, w);
        if (e == 1)
            return k == group;
    }
    return false;
}

}  // namespace

uint32_t Field::primitive_poly(int width) {
    if (width < 1 || width > 16)
        throw ArgumentError("field width must be in [1,16], got " + std::to_string(width));
    static std::array<uint32_t, 17> cache{};
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    if (cache[width])
        return cache[width];
    for (uint32_t cand = (1u << width) + 1; cand < (2u << width); cand += 2) {
        if (is_primitive(cand, width)) {
            cache[width] = cand;
            return cand;
        }
    }
    throw InternalError("no primitive polynomial found for width " + std::to_string(width));
}

Field::Field(int width) : width_(width), poly_(primitive_poly(width)) {}

uint16_t Field::mul(uint16_t x, uint16_t y) const {
    uint32_t acc = 0;
    uint32_t a = x;
    for (int i = 0; i < width_; ++i)
        if ((y >> i) & 1u)
            acc ^= a << i;
    for (int bit = 2 * width_ - 2; bit >= width_; --bit)
        if ((acc >> bit) & 1u)
            acc ^= poly_ << (bit - width_);
    return static_cast<uint16_t>(acc & mask());
}

uint16_t Field::pow(uint16_t x, uint32_t e) const {
    uint16_t result = 1;
    uint16_t base = x;
    while (e) {
        if (e & 1u)
            result = mul(result, base);
        base = mul(base, base);
        e >>= 1;
    }
    return result;
}

uint16_t Field::inv(uint16_t x) const {
    if (x == 0)
        throw ArgumentError("no inverse of 0");
    return pow(x, (1u << width_) - 2u);
}

bool triplets_valid(const Field& f, const CoeffTriplets& t) {
    for (int i = 0; i < 3; ++i) {
        if (t.a[i] == 0 || t.b[i] == 0)
            return false;
        for (int j = i + 1; j < 3; ++j) {
            uint16_t det = Field::add(f.mul(t.a[i], t.b[j]), f.mul(t.a[j], t.b[i]));
            if (det == 0)
                return false;
        }
    }
    return true;
}

CoeffTriplets choose_triplets(const Field& f) {
    if (f.width() < 2)
        throw InfeasibleError(
            "GF(2) admits no valid coefficient triplets: the only nonzero element is 1");
    CoeffTriplets t{{1, 1, 1}, {1, 2, 3}};
    if (!triplets_valid(f, t))
        throw InternalError("default coefficient triplets failed the determinant check");
    return t;
}

}  // namespace rtnc
