// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <relaylab/merkle.hpp>

#include <optional>

// Systematic Reed-Solomon over GF(2^16) (reduction polynomial 0x1100B).
//
// The blob is prefixed with its u64 length, padded to k * L bytes with L even,
// and split into k data shards. Each 16-bit symbol column is interpolated as a
// polynomial of degree < k through the points x = 0..k-1; parity shard i is
// that polynomial evaluated at x = i. Any k distinct shards determine it.
namespace relaylab::erasure {

constexpr size_t max_pieces = 65535;

inline size_t threshold(size_t n) { return (n + 2) / 3; }

struct Piece {
    uint32_t index = 0;
    Bytes data;
    merkle::Proof proof;
};

struct ErasurePieces {
    size_t n = 0;
    size_t k = 0;
    std::vector<Piece> pieces;
    Digest root; // Merkle root over piece_leaf(i, data_i)
};

Digest piece_leaf(uint32_t index, ByteView data);

ErasurePieces encode(ByteView blob, size_t n);

// Pieces whose proof fails against `root` are dropped before decoding.
Bytes reconstruct(std::span<const Piece> pieces, size_t n, const Digest& root);

namespace gf {
uint16_t mul(uint16_t a, uint16_t b);
uint16_t inv(uint16_t a);
// number of distinct nonzero powers of the generator (65535 when primitive)
size_t generator_order();
} // namespace gf

} // namespace relaylab::erasure
