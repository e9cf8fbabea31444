#include "rtnc/codec.hpp"

namespace rtnc {

bool MessageStore::known(int64_t ordinal) const {
    if (ordinal < 0)
        return true;
    return ordinal <= watermark_ || pending_.count(ordinal) > 0;
}

uint16_t MessageStore::payload(int64_t ordinal) const {
    if (ordinal < 0)
        return 0;
    if (ordinal <= watermark_) {
        if (ordinal < lowest_)
            throw InternalError("message store: access to an evicted entry");
        return window_[static_cast<size_t>(ordinal - lowest_)];
    }
    auto it = pending_.find(ordinal);
    if (it == pending_.end())
        throw ProtocolViolation("message store: payload of an undecoded ordinal requested");
    return it->second;
}

bool MessageStore::insert(int64_t ordinal, uint16_t payload) {
    if (ordinal < 0)
        throw ArgumentError("cannot insert a negative ordinal");
    if (known(ordinal)) {
        if (this->payload(ordinal) != payload)
            throw InternalError("message store: conflicting re-decode");
        return false;
    }
    pending_[ordinal] = payload;
    while (true) {
        auto it = pending_.find(watermark_ + 1);
        if (it == pending_.end())
            break;
        window_.push_back(it->second);
        pending_.erase(it);
        ++watermark_;
        if (retention_ > 0) {
            while (watermark_ - lowest_ + 1 > retention_) {
                window_.pop_front();
                ++lowest_;
            }
        }
    }
    return true;
}

int64_t even_floor(int64_t x) {
    int64_t fl = x >= 0 ? x / 2 : -((-x + 1) / 2);
    return 2 * fl;
}

const std::array<uint16_t, 3>& coeff_set(const CoeffTriplets& c, int64_t t) {
    return (((t % 2) + 2) % 2 == 0) ? c.a : c.b;
}

namespace {

uint16_t msg(const MessageFn& w, int stream, int64_t timestamp) {
    return timestamp < 0 ? 0 : w(stream, timestamp);
}

uint32_t parity_bit(int64_t t) {
    return static_cast<uint32_t>(((t % 2) + 2) % 2);
}

}  // namespace

std::array<int64_t, 2> line_sync_schedule(int m, int node, int64_t t) {
    return {t - (node - 1), t - (m - node)};
}

uint16_t line_sync_symbol(const Field& f, uint16_t k1, uint16_t kM, int m, int node, int64_t t,
                          const MessageFn& w) {
    auto ts = line_sync_schedule(m, node, t);
    return Field::add(f.mul(k1, msg(w, 0, ts[0])), f.mul(kM, msg(w, 1, ts[1])));
}

// Every packet carries a single coefficient set. Sources and the line-star
// center select the set by their own slot parity; relays forming literal
// packet sums inherit the parity of their inputs (one slot older).
ScheduledStarSymbol star_sync_source_schedule(int i, int64_t t) {
    ScheduledStarSymbol s;
    s.kbit = parity_bit(t);
    for (int j = 0; j < 3; ++j)
        s.ts[j] = (j == i) ? even_floor(t) : even_floor(t - 3);
    return s;
}

ScheduledStarSymbol star_sync_relay_schedule(int64_t t) {
    ScheduledStarSymbol s;
    s.kbit = parity_bit(t - 1);
    s.ts = {even_floor(t - 1), even_floor(t - 1), even_floor(t - 1)};
    return s;
}

ScheduledStarSymbol linestar_sync_center_schedule(int64_t t) {
    ScheduledStarSymbol s;
    s.kbit = parity_bit(t);
    s.ts = {even_floor(t - 2), even_floor(t - 1), even_floor(t - 1)};
    return s;
}

ScheduledStarSymbol linestar_sync_line_relay_schedule(int64_t t) {
    ScheduledStarSymbol s;
    s.kbit = parity_bit(t - 1);
    s.ts = {even_floor(t - 1), even_floor(t - 2), even_floor(t - 2)};
    return s;
}

uint16_t eval_star_schedule(const Field& f, const CoeffTriplets& c,
                            const ScheduledStarSymbol& s, const MessageFn& w) {
    const auto& k = s.kbit ? c.b : c.a;
    uint16_t acc = 0;
    for (int j = 0; j < 3; ++j)
        acc = Field::add(acc, f.mul(k[j], msg(w, j, s.ts[j])));
    return acc;
}

uint16_t star_sync_source_symbol(const Field& f, const CoeffTriplets& c, int i, int64_t t,
                                 const MessageFn& w) {
    return eval_star_schedule(f, c, star_sync_source_schedule(i, t), w);
}

uint16_t star_sync_relay_symbol(const Field& f, const CoeffTriplets& c, int64_t t,
                                const MessageFn& w) {
    return eval_star_schedule(f, c, star_sync_relay_schedule(t), w);
}

uint16_t linestar_sync_center_symbol(const Field& f, const CoeffTriplets& c, int64_t t,
                                     const MessageFn& w) {
    return eval_star_schedule(f, c, linestar_sync_center_schedule(t), w);
}

uint16_t linestar_sync_line_relay_symbol(const Field& f, const CoeffTriplets& c, int64_t t,
                                         const MessageFn& w) {
    return eval_star_schedule(f, c, linestar_sync_line_relay_schedule(t), w);
}

}  // namespace rtnc
