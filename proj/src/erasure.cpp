// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <relaylab/erasure.hpp>

#include <algorithm>
#include <set>

namespace relaylab::erasure {
namespace gf {
namespace {

constexpr uint32_t poly = 0x1100B;
constexpr uint32_t order = 65535;

struct Tables {
    std::vector<uint16_t> exp;
    std::vector<uint32_t> log;
    size_t distinct = 0;

    Tables() : exp(2 * order), log(order + 1, 0)
    {
        uint32_t x = 1;
        std::vector<bool> seen(order + 1, false);
        for (uint32_t i = 0; i < order; ++i) {
            exp[i] = static_cast<uint16_t>(x);
            if (!seen[x]) {
                seen[x] = true;
                ++distinct;
            }
            log[x] = i;
            x <<= 1;
            if (x & 0x10000)
                x ^= poly;
        }
        for (uint32_t i = order; i < 2 * order; ++i)
            exp[i] = exp[i - order];
    }
};

const Tables& tables()
{
    static const Tables t;
    return t;
}

} // namespace

uint16_t mul(uint16_t a, uint16_t b)
{
    if (a == 0 || b == 0)
        return 0;
    const auto& t = tables();
    return t.exp[t.log[a] + t.log[b]];
}

uint16_t inv(uint16_t a)
{
    if (a == 0)
        throw Error(ErrorKind::decode, "inverse of zero");
    const auto& t = tables();
    return t.exp[order - t.log[a]];
}

size_t generator_order() { return tables().distinct; }

} // namespace gf

namespace {

// Lagrange basis weights: row j gives the coefficients that evaluate the
// polynomial through points xs at target ys[j].
std::vector<std::vector<uint16_t>> lagrange(const std::vector<uint16_t>& xs, const std::vector<uint16_t>& ys)
{
    const size_t k = xs.size();
    std::vector<std::vector<uint16_t>> w(ys.size(), std::vector<uint16_t>(k));
    for (size_t j = 0; j < ys.size(); ++j) {
        for (size_t i = 0; i < k; ++i) {
            if (ys[j] == xs[i]) {
                std::fill(w[j].begin(), w[j].end(), 0);
                w[j][i] = 1;
                break;
            }
            uint16_t num = 1;
            uint16_t den = 1;
            for (size_t m = 0; m < k; ++m) {
                if (m == i)
                    continue;
                num = gf::mul(num, ys[j] ^ xs[m]);
                den = gf::mul(den, xs[i] ^ xs[m]);
            }
            w[j][i] = gf::mul(num, gf::inv(den));
        }
    }
    return w;
}

uint16_t symbol(const Bytes& shard, size_t col)
{
    return static_cast<uint16_t>(shard[2 * col] | (shard[2 * col + 1] << 8));
}

void put_symbol(Bytes& shard, size_t col, uint16_t v)
{
    shard[2 * col] = static_cast<uint8_t>(v);
    shard[2 * col + 1] = static_cast<uint8_t>(v >> 8);
}

// evaluates through `known` shards (points xs) at every target point
std::vector<Bytes> interpolate(const std::vector<const Bytes*>& known, const std::vector<uint16_t>& xs,
                               const std::vector<uint16_t>& targets, size_t shard_len)
{
    auto w = lagrange(xs, targets);
    std::vector<Bytes> out(targets.size(), Bytes(shard_len, 0));
    const size_t cols = shard_len / 2;
    for (size_t c = 0; c < cols; ++c) {
        for (size_t j = 0; j < targets.size(); ++j) {
            uint16_t acc = 0;
            for (size_t i = 0; i < known.size(); ++i)
                acc ^= gf::mul(w[j][i], symbol(*known[i], c));
            put_symbol(out[j], c, acc);
        }
    }
    return out;
}

} // namespace

Digest piece_leaf(uint32_t index, ByteView data)
{
    auto idx = ByteWriter().u32(index).bytes();
    return hash({idx, data});
}

ErasurePieces encode(ByteView blob, size_t n)
{
    if (n == 0 || n > max_pieces)
        throw Error(ErrorKind::config, "piece count out of range");
    ErasurePieces res;
    res.n = n;
    res.k = threshold(n);
    const size_t k = res.k;

    auto framed = ByteWriter().u64(blob.size()).raw(blob).bytes();
    size_t shard_len = (framed.size() + k - 1) / k;
    shard_len += shard_len % 2;
    framed.resize(shard_len * k, 0);

    std::vector<Bytes> shards(n);
    for (size_t i = 0; i < k; ++i)
        shards[i].assign(framed.begin() + static_cast<ptrdiff_t>(i * shard_len),
                         framed.begin() + static_cast<ptrdiff_t>((i + 1) * shard_len));
    if (n > k) {
        std::vector<const Bytes*> known;
        std::vector<uint16_t> xs;
        for (size_t i = 0; i < k; ++i) {
            known.push_back(&shards[i]);
            xs.push_back(static_cast<uint16_t>(i));
        }
        std::vector<uint16_t> targets;
        for (size_t i = k; i < n; ++i)
            targets.push_back(static_cast<uint16_t>(i));
        auto parity = interpolate(known, xs, targets, shard_len);
        for (size_t i = k; i < n; ++i)
            shards[i] = std::move(parity[i - k]);
    }

    std::vector<Digest> leaves;
    for (size_t i = 0; i < n; ++i)
        leaves.push_back(piece_leaf(static_cast<uint32_t>(i), shards[i]));
    res.root = merkle::root(leaves);
    for (size_t i = 0; i < n; ++i)
        res.pieces.push_back({static_cast<uint32_t>(i), std::move(shards[i]), merkle::prove(leaves, static_cast<uint32_t>(i))});
    return res;
}

Bytes reconstruct(std::span<const Piece> pieces, size_t n, const Digest& root)
{
    const size_t k = threshold(n);
    std::vector<const Bytes*> known;
    std::vector<uint16_t> xs;
    std::set<uint32_t> used;
    size_t shard_len = 0;
    for (const auto& p : pieces) {
        if (p.index >= n || used.contains(p.index) || p.proof.index != p.index || p.proof.leaf_count != n)
            continue;
        if (!merkle::verify(root, piece_leaf(p.index, p.data), p.proof))
            continue;
        if (known.empty())
            shard_len = p.data.size();
        else if (p.data.size() != shard_len)
            continue;
        used.insert(p.index);
        known.push_back(&p.data);
        xs.push_back(static_cast<uint16_t>(p.index));
        if (known.size() == k)
            break;
    }
    if (known.size() < k)
        throw Error(ErrorKind::insufficient_pieces,
                    "have " + std::to_string(known.size()) + " valid pieces, need " + std::to_string(k));

    std::vector<uint16_t> targets;
    for (size_t i = 0; i < k; ++i)
        targets.push_back(static_cast<uint16_t>(i));
    auto data = interpolate(known, xs, targets, shard_len);
    Bytes framed;
    for (auto& s : data)
        framed.insert(framed.end(), s.begin(), s.end());
    ByteReader r(framed);
    auto len = r.u64();
    if (len > r.remaining())
        throw Error(ErrorKind::decode, "recorded length exceeds shard data");
    auto body = r.raw(len);
    return Bytes(body.begin(), body.end());
}

} // namespace relaylab::erasure
