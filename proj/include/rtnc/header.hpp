#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rtnc/errors.hpp"

namespace rtnc {

// Header index width: ceil(log2(2D)) bits per encoded message index.
int index_width(int delay_bound);

// Block id width: ceil(log2 h) bits; zero when a single block suffices.
int block_id_width(int h_blocks);

// Total header widths in bits.
int line_header_width(int delay_bound, int h_blocks = 1);
int star_header_width(int delay_bound, int h_blocks = 1);

// Raw header field values as they appear on the wire (already reduced mod
// 2^index_width). Ordinal -1 ("nothing encoded yet") reduces naturally.
struct LineHeader {
    uint32_t p = 0;
    uint32_t q = 0;
};

struct StarHeader {
    uint32_t p = 0;
    uint32_t q = 0;
    uint32_t u = 0;
    uint32_t kbit = 0;  // 0 = coefficient set a, 1 = set b
};

// MSB-first bit packing.
class BitWriter {
public:
    void put(uint32_t value, int width);
    int bit_count() const { return bits_; }
    // Tail-padded with zero bits to a whole number of bytes.
    std::vector<uint8_t> bytes() const { return bytes_; }

private:
    std::vector<uint8_t> bytes_;
    int bits_ = 0;
};

class BitReader {
public:
    BitReader(const uint8_t* data, size_t size) : data_(data), size_(size) {}
    uint32_t get(int width);

private:
    const uint8_t* data_;
    size_t size_;
    int pos_ = 0;
};

// Bit-exact packing: [p][q] for line, [p][q][u][k] for star, then the block
// id when h_blocks > 1. Throws ArgumentError when a field overflows its
// declared width.
std::vector<uint8_t> pack_header(const LineHeader& h, int delay_bound, int block_id,
                                 int h_blocks);
std::vector<uint8_t> pack_header(const StarHeader& h, int delay_bound, int block_id,
                                 int h_blocks);
LineHeader unpack_line_header(const std::vector<uint8_t>& bytes, int delay_bound, int h_blocks,
                              int* block_id_out = nullptr);
StarHeader unpack_star_header(const std::vector<uint8_t>& bytes, int delay_bound, int h_blocks,
                              int* block_id_out = nullptr);

// Whole packet: header bits followed by the C-bit payload symbol, padded at
// the packet tail.
std::vector<uint8_t> pack_packet(const LineHeader& h, int delay_bound, int block_id,
                                 int h_blocks, uint16_t payload, int payload_width);
std::vector<uint8_t> pack_packet(const StarHeader& h, int delay_bound, int block_id,
                                 int h_blocks, uint16_t payload, int payload_width);

std::string hex_dump(const std::vector<uint8_t>& bytes);

// Reduce an ordinal (>= -1) to its wire value.
uint32_t ordinal_to_wire(int64_t ordinal, int width);

// Recover the absolute ordinal from a wire value: the unique candidate
// congruent mod 2^width within (reference - 2^(width-1), reference +
// 2^(width-1)]. The reference tracks the largest ordinal already seen from
// the same neighbor for this stream, which the bounded delay keeps within
// the window.
int64_t resolve_ordinal(uint32_t wire, int64_t reference, int width);

}  // namespace rtnc
