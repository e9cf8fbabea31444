#include "rtnc/header.hpp"

namespace rtnc {

int index_width(int delay_bound) {
    if (delay_bound < 1)
        throw ArgumentError("delay bound must be >= 1");
    int w = 0;
    while ((1 << w) < 2 * delay_bound)
        ++w;
    return w;
}

int block_id_width(int h_blocks) {
    if (h_blocks < 1)
        throw ArgumentError("h must be >= 1");
    int w = 0;
    while ((1 << w) < h_blocks)
        ++w;
    return w;
}

int line_header_width(int delay_bound, int h_blocks) {
    return 2 * index_width(delay_bound) + block_id_width(h_blocks);
}

int star_header_width(int delay_bound, int h_blocks) {
    return 3 * index_width(delay_bound) + 1 + block_id_width(h_blocks);
}

void BitWriter::put(uint32_t value, int width) {
    if (width < 0 || width > 32)
        throw ArgumentError("bad field width");
    if (width < 32 && value >= (1u << width))
        throw ArgumentError("header field overflows its width");
    for (int i = width - 1; i >= 0; --i) {
        if (bits_ % 8 == 0)
            bytes_.push_back(0);
        if ((value >> i) & 1u)
            bytes_.back() |= static_cast<uint8_t>(1u << (7 - bits_ % 8));
        ++bits_;
    }
}

uint32_t BitReader::get(int width) {
    uint32_t v = 0;
    for (int i = 0; i < width; ++i) {
        size_t byte = static_cast<size_t>(pos_) / 8;
        if (byte >= size_)
            throw ArgumentError("packet truncated");
        int bit = 7 - pos_ % 8;
        v = (v << 1) | ((data_[byte] >> bit) & 1u);
        ++pos_;
    }
    return v;
}

namespace {

void put_block(BitWriter& w, int block_id, int h_blocks) {
    int bw = block_id_width(h_blocks);
    if (bw == 0) {
        if (block_id != 0)
            throw ArgumentError("nonzero block id with a single block");
        return;
    }
    w.put(static_cast<uint32_t>(block_id), bw);
}

}  // namespace

std::vector<uint8_t> pack_header(const LineHeader& h, int delay_bound, int block_id,
                                 int h_blocks) {
    BitWriter w;
    int iw = index_width(delay_bound);
    w.put(h.p, iw);
    w.put(h.q, iw);
    put_block(w, block_id, h_blocks);
    return w.bytes();
}

std::vector<uint8_t> pack_header(const StarHeader& h, int delay_bound, int block_id,
                                 int h_blocks) {
    BitWriter w;
    int iw = index_width(delay_bound);
    w.put(h.p, iw);
    w.put(h.q, iw);
    w.put(h.u, iw);
    w.put(h.kbit, 1);
    put_block(w, block_id, h_blocks);
    return w.bytes();
}

LineHeader unpack_line_header(const std::vector<uint8_t>& bytes, int delay_bound, int h_blocks,
                              int* block_id_out) {
    BitReader r(bytes.data(), bytes.size());
    int iw = index_width(delay_bound);
    LineHeader h;
    h.p = r.get(iw);
    h.q = r.get(iw);
    int bw = block_id_width(h_blocks);
    int block = bw ? static_cast<int>(r.get(bw)) : 0;
    if (block_id_out)
        *block_id_out = block;
    return h;
}

StarHeader unpack_star_header(const std::vector<uint8_t>& bytes, int delay_bound, int h_blocks,
                              int* block_id_out) {
    BitReader r(bytes.data(), bytes.size());
    int iw = index_width(delay_bound);
    StarHeader h;
    h.p = r.get(iw);
    h.q = r.get(iw);
    h.u = r.get(iw);
    h.kbit = r.get(1);
    int bw = block_id_width(h_blocks);
    int block = bw ? static_cast<int>(r.get(bw)) : 0;
    if (block_id_out)
        *block_id_out = block;
    return h;
}

std::vector<uint8_t> pack_packet(const LineHeader& h, int delay_bound, int block_id,
                                 int h_blocks, uint16_t payload, int payload_width) {
    BitWriter w;
    int iw = index_width(delay_bound);
    w.put(h.p, iw);
    w.put(h.q, iw);
    put_block(w, block_id, h_blocks);
    w.put(payload, payload_width);
    return w.bytes();
}

std::vector<uint8_t> pack_packet(const StarHeader& h, int delay_bound, int block_id,
                                 int h_blocks, uint16_t payload, int payload_width) {
    BitWriter w;
    int iw = index_width(delay_bound);
    w.put(h.p, iw);
    w.put(h.q, iw);
    w.put(h.u, iw);
    w.put(h.kbit, 1);
    put_block(w, block_id, h_blocks);
    w.put(payload, payload_width);
    return w.bytes();
}

std::string hex_dump(const std::vector<uint8_t>& bytes) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

uint32_t ordinal_to_wire(int64_t ordinal, int width) {
    if (ordinal < -1)
        throw ArgumentError("ordinal below -1");
    int64_t mod = int64_t{1} << width;
    return static_cast<uint32_t>(((ordinal % mod) + mod) % mod);
}

int64_t resolve_ordinal(uint32_t wire, int64_t reference, int width) {
    int64_t mod = int64_t{1} << width;
    int64_t half = mod >> 1;
    int64_t delta = (static_cast<int64_t>(wire) - reference) % mod;
    if (delta > half)
        delta -= mod;
    if (delta <= -half)
        delta += mod;
    // Window (ref - half, ref + half]; the bounded delay and the one-step
    // cursor advance keep the true ordinal inside it.
    int64_t a = reference + delta;
    if (a < -1)
        throw ProtocolViolation("resolved ordinal below -1");
    return a;
}

}  // namespace rtnc
