// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <relaylab/crypto.hpp>

#include <vector>

// Binary Merkle tree over a list of leaf digests. The leaf list is padded to
// the next power of two by repeating the last leaf; inner nodes are
// hash(0x01 || left || right). The root of an empty list is the zero digest.
namespace relaylab::merkle {

struct Proof {
    uint32_t index = 0;
    uint32_t leaf_count = 0;
    std::vector<Digest> siblings;
};

Digest root(std::span<const Digest> leaves);
Proof prove(std::span<const Digest> leaves, uint32_t index);
bool verify(const Digest& root, const Digest& leaf, const Proof& proof);

Bytes encode(const Proof& proof);
Proof decode_proof(ByteView data);

} // namespace relaylab::merkle
