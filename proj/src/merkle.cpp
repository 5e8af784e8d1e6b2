// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <relaylab/merkle.hpp>

#include <bit>

namespace relaylab::merkle {

namespace {
Digest node(const Digest& l, const Digest& r)
{
    static constexpr uint8_t tag[] = {0x01};
    return hash({ByteView(tag), l.view(), r.view()});
}

std::vector<Digest> padded(std::span<const Digest> leaves)
{
    std::vector<Digest> level(leaves.begin(), leaves.end());
    level.resize(std::bit_ceil(level.size()), level.back());
    return level;
}
} // namespace

Digest root(std::span<const Digest> leaves)
{
    if (leaves.empty())
        return Digest{};
    auto level = padded(leaves);
    while (level.size() > 1) {
        std::vector<Digest> next(level.size() / 2);
        for (size_t i = 0; i < next.size(); ++i)
            next[i] = node(level[2 * i], level[2 * i + 1]);
        level = std::move(next);
    }
    return level.front();
}

Proof prove(std::span<const Digest> leaves, uint32_t index)
{
    if (index >= leaves.size())
        throw Error(ErrorKind::key_absent, "merkle leaf index out of range");
    Proof p{index, static_cast<uint32_t>(leaves.size()), {}};
    auto level = padded(leaves);
    size_t pos = index;
    while (level.size() > 1) {
        p.siblings.push_back(level[pos ^ 1]);
        std::vector<Digest> next(level.size() / 2);
        for (size_t i = 0; i < next.size(); ++i)
            next[i] = node(level[2 * i], level[2 * i + 1]);
        level = std::move(next);
        pos /= 2;
    }
    return p;
}

bool verify(const Digest& root, const Digest& leaf, const Proof& proof)
{
    if (proof.leaf_count == 0 || proof.index >= proof.leaf_count)
        return false;
    auto depth = static_cast<size_t>(std::countr_zero(std::bit_ceil(proof.leaf_count)));
    if (proof.siblings.size() != depth)
        return false;
    Digest acc = leaf;
    size_t pos = proof.index;
    for (const auto& s : proof.siblings) {
        acc = (pos & 1) ? node(s, acc) : node(acc, s);
        pos /= 2;
    }
    return acc == root;
}

Bytes encode(const Proof& proof)
{
    ByteWriter w;
    w.u32(proof.index).u32(proof.leaf_count).u32(static_cast<uint32_t>(proof.siblings.size()));
    for (const auto& s : proof.siblings)
        w.raw(s.view());
    return std::move(w).bytes();
}

Proof decode_proof(ByteView data)
{
    ByteReader r(data);
    Proof p;
    p.index = r.u32();
    p.leaf_count = r.u32();
    auto n = r.u32();
    if (n > 64)
        throw Error(ErrorKind::decode, "merkle proof too deep");
    for (uint32_t i = 0; i < n; ++i)
        p.siblings.push_back(Digest::from_view(r.raw(32)));
    if (!r.done())
        throw Error(ErrorKind::decode, "trailing bytes in merkle proof");
    return p;
}

} // namespace relaylab::merkle
