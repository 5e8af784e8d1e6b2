// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <relaylab/crypto.hpp>

#include <functional>
#include <memory>
#include <optional>

namespace relaylab::trie {

/*
 * Node encoding (hashed with BLAKE2b-256, every node is referenced by hash):
 *
 *   empty trie : 0x00
 *   leaf       : 0x01 | u16 nibble_count | packed nibbles | u32 len | value
 *   branch     : 0x02 | u16 nibble_count | packed nibbles | u16 child_bitmap | child hashes
 *   branch+val : 0x03 | u16 nibble_count | packed nibbles | u16 child_bitmap | u32 len | value | child hashes
 *
 * Integers are little-endian. Nibbles are packed high-nibble first; an odd
 * count leaves the low nibble of the last byte zero. Bit i of the bitmap marks
 * child nibble i; child hashes follow in increasing nibble order. The trie is
 * path-compressed and normalised (no valueless node with fewer than two
 * children), so the root depends only on the key/value content.
 */

struct InclusionProof {
    Bytes key;
    Bytes value;
    // encoded nodes from the root down to the node holding the value
    std::vector<Bytes> path;
};

class StateTrie {
public:
    StateTrie();

    [[nodiscard]] StateTrie insert(ByteView key, ByteView value) const;
    [[nodiscard]] StateTrie erase(ByteView key) const;
    std::optional<Bytes> get(ByteView key) const;
    Digest root() const;
    InclusionProof prove(ByteView key) const;
    size_t size() const noexcept;
    bool empty() const noexcept { return root_ == nullptr; }

    // visits pairs in key order
    void for_each(const std::function<void(const Bytes& key, const Bytes& value)>& fn) const;

    // deepest child count seen, used by structure tests
    size_t max_children() const;

    struct Node;

private:
    explicit StateTrie(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

    std::shared_ptr<const Node> root_;
};

bool verify_proof(const Digest& root, const InclusionProof& proof);

Digest empty_root();

// convenience for string keys used throughout the runtime
inline StateTrie put(const StateTrie& t, std::string_view key, ByteView value)
{
    return t.insert(as_view(key), value);
}
inline std::optional<Bytes> get(const StateTrie& t, std::string_view key)
{
    return t.get(as_view(key));
}

} // namespace relaylab::trie
