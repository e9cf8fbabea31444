#include "rtnc/codec.hpp"

#include <algorithm>

namespace rtnc {

namespace {

// In-order forwarding: send the oldest not-yet-forwarded decoded message,
// the newest one again when caught up, the startup sentinel when nothing has
// been decoded. One step per emission keeps the modular indices resolvable.
int64_t advance_cursor(int64_t cursor, int64_t watermark) {
    return cursor < watermark ? cursor + 1 : watermark;
}

}  // namespace

LineNodeCodec::LineNodeCodec(const Field& f, uint16_t k_front, uint16_t k_back, int delay_bound,
                             int num_neighbors, int own_stream, int64_t retention)
    : field_(f), k_{k_front, k_back}, width_(index_width(delay_bound)),
      own_stream_(own_stream), store_{MessageStore(retention), MessageStore(retention)},
      ref_(num_neighbors, {-1, -1}) {
    if (k_front == 0 || k_back == 0)
        throw ArgumentError("line coefficients must be nonzero");
}

void LineNodeCodec::push_own(int64_t ordinal, uint16_t payload) {
    if (own_stream_ < 0)
        throw ArgumentError("relays do not generate messages");
    store_[own_stream_].insert(ordinal, payload);
}

LineNodeCodec::Encoded LineNodeCodec::encode() {
    Encoded e;
    for (int s = 0; s < 2; ++s) {
        cursor_[s] = advance_cursor(cursor_[s], store_[s].watermark());
        e.ordinals[s] = cursor_[s];
    }
    e.header.p = ordinal_to_wire(e.ordinals[0], width_);
    e.header.q = ordinal_to_wire(e.ordinals[1], width_);
    e.payload = Field::add(field_.mul(k_[0], store_[0].payload(e.ordinals[0])),
                           field_.mul(k_[1], store_[1].payload(e.ordinals[1])));
    return e;
}

std::vector<Decoded> LineNodeCodec::receive(int neighbor, const LineHeader& raw,
                                            uint16_t payload) {
    auto& ref = ref_.at(neighbor);
    std::array<int64_t, 2> ords{resolve_ordinal(raw.p, ref[0], width_),
                                resolve_ordinal(raw.q, ref[1], width_)};
    ref[0] = std::max(ref[0], ords[0]);
    ref[1] = std::max(ref[1], ords[1]);
    return receive_resolved(ords, payload);
}

std::vector<Decoded> LineNodeCodec::receive_resolved(const std::array<int64_t, 2>& ords,
                                                     uint16_t payload) {
    bool known0 = store_[0].known(ords[0]);
    bool known1 = store_[1].known(ords[1]);
    if (known0 && known1)
        return {};
    if (!known0 && !known1)
        throw ProtocolViolation("line decode: both components unknown");
    int unknown = known0 ? 1 : 0;
    int other = 1 - unknown;
    uint16_t residual =
        Field::add(payload, field_.mul(k_[other], store_[other].payload(ords[other])));
    uint16_t value = field_.mul(field_.inv(k_[unknown]), residual);
    if (!store_[unknown].insert(ords[unknown], value))
        return {};
    return {{unknown, ords[unknown], value}};
}

StarNodeCodec::StarNodeCodec(const Field& f, const CoeffTriplets& coeffs, int delay_bound,
                             int num_neighbors, int own_stream, int anchor_parity,
                             int64_t retention)
    : field_(f), coeffs_(coeffs), width_(index_width(delay_bound)), own_stream_(own_stream),
      anchor_parity_(anchor_parity & 1),
      store_{MessageStore(retention), MessageStore(retention), MessageStore(retention)},
      ref_(num_neighbors, {-1, -1, -1}), pending_(num_neighbors) {
    if (!triplets_valid(f, coeffs))
        throw ArgumentError("invalid coefficient triplets");
}

void StarNodeCodec::push_own(int64_t ordinal, uint16_t payload) {
    if (own_stream_ < 0)
        throw ArgumentError("relays do not generate messages");
    store_[own_stream_].insert(ordinal, payload);
}

StarNodeCodec::Encoded StarNodeCodec::encode(int64_t slot) {
    uint32_t kbit;
    if ((slot & 1) == anchor_parity_ || !pair_open_) {
        for (int s = 0; s < 3; ++s)
            pair_ords_[s] = advance_cursor(cursor_[s], store_[s].watermark());
        cursor_ = pair_ords_;
        pair_open_ = true;
        kbit = 0;
    } else {
        kbit = 1;
    }
    Encoded e;
    e.ordinals = pair_ords_;
    e.header.p = ordinal_to_wire(pair_ords_[0], width_);
    e.header.q = ordinal_to_wire(pair_ords_[1], width_);
    e.header.u = ordinal_to_wire(pair_ords_[2], width_);
    e.header.kbit = kbit;
    const auto& k = set_of(kbit);
    uint16_t acc = 0;
    for (int s = 0; s < 3; ++s)
        acc = Field::add(acc, field_.mul(k[s], store_[s].payload(pair_ords_[s])));
    e.payload = acc;
    return e;
}

std::vector<Decoded> StarNodeCodec::receive(int neighbor, const StarHeader& raw,
                                            uint16_t payload) {
    auto& ref = ref_.at(neighbor);
    std::array<int64_t, 3> ords{resolve_ordinal(raw.p, ref[0], width_),
                                resolve_ordinal(raw.q, ref[1], width_),
                                resolve_ordinal(raw.u, ref[2], width_)};
    for (int s = 0; s < 3; ++s)
        ref[s] = std::max(ref[s], ords[s]);
    return receive_resolved(neighbor, ords, raw.kbit, payload);
}

std::vector<Decoded> StarNodeCodec::receive_resolved(int neighbor,
                                                     const std::array<int64_t, 3>& ords,
                                                     uint32_t kbit, uint16_t payload) {
    std::vector<Decoded> out;
    auto unknowns_of = [&](const std::array<int64_t, 3>& o) {
        std::vector<int> u;
        for (int s = 0; s < 3; ++s)
            if (!store_[s].known(o[s]))
                u.push_back(s);
        return u;
    };
    auto subtract_knowns = [&](const PendingHalf& h, const std::vector<int>& unknown) {
        const auto& k = set_of(h.kbit);
        uint16_t acc = h.payload;
        for (int s = 0; s < 3; ++s) {
            bool is_unknown = std::find(unknown.begin(), unknown.end(), s) != unknown.end();
            if (!is_unknown)
                acc = Field::add(acc, field_.mul(k[s], store_[s].payload(h.ords[s])));
        }
        return acc;
    };
    auto decode_single = [&](const PendingHalf& h, int stream) {
        uint16_t residual = subtract_knowns(h, {stream});
        uint16_t value = field_.mul(field_.inv(set_of(h.kbit)[stream]), residual);
        if (store_[stream].insert(h.ords[stream], value))
            out.push_back({stream, h.ords[stream], value});
    };
    auto decode_pair = [&](const PendingHalf& h0, const PendingHalf& h1,
                           const std::vector<int>& unknown) {
        int j = unknown[0], l = unknown[1];
        const auto& c0 = set_of(h0.kbit);
        const auto& c1 = set_of(h1.kbit);
        uint16_t y0 = subtract_knowns(h0, unknown);
        uint16_t y1 = subtract_knowns(h1, unknown);
        uint16_t det = Field::add(field_.mul(c0[j], c1[l]), field_.mul(c0[l], c1[j]));
        if (det == 0)
            throw InternalError("singular pair system despite the triplet condition");
        uint16_t inv_det = field_.inv(det);
        uint16_t wj = field_.mul(inv_det, Field::add(field_.mul(y0, c1[l]),
                                                     field_.mul(y1, c0[l])));
        uint16_t wl = field_.mul(inv_det, Field::add(field_.mul(c0[j], y1),
                                                     field_.mul(c1[j], y0)));
        if (store_[j].insert(h0.ords[j], wj))
            out.push_back({j, h0.ords[j], wj});
        if (store_[l].insert(h0.ords[l], wl))
            out.push_back({l, h0.ords[l], wl});
    };

    {
        PendingHalf half{ords, kbit, payload};
        auto unknown = unknowns_of(ords);
        if (unknown.size() == 1) {
            decode_single(half, unknown[0]);
        } else if (unknown.size() == 2) {
            std::array<int64_t, 4> key{unknown[0], ords[unknown[0]], unknown[1],
                                       ords[unknown[1]]};
            auto& bucket = pending_.at(neighbor);
            auto it = bucket.find(key);
            if (it != bucket.end() && it->second.kbit != kbit) {
                decode_pair(it->second, half, unknown);
                bucket.erase(it);
            } else {
                bucket[key] = half;
            }
        } else if (unknown.size() == 3) {
            throw ProtocolViolation("star decode: all three components unknown");
        }
    }
    // New knowledge may unlock buffered halves; iterate to a fixed point.
    bool progress = !out.empty();
    while (progress) {
        progress = false;
        for (size_t nb = 0; nb < pending_.size(); ++nb) {
            for (auto it = pending_[nb].begin(); it != pending_[nb].end();) {
                auto unknown = unknowns_of(it->second.ords);
                if (unknown.empty()) {
                    it = pending_[nb].erase(it);
                } else if (unknown.size() == 1) {
                    size_t before = out.size();
                    decode_single(it->second, unknown[0]);
                    progress |= out.size() != before;
                    it = pending_[nb].erase(it);
                } else {
                    ++it;
                }
            }
        }
    }
    return out;
}

}  // namespace rtnc
