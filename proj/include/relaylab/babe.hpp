// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <relaylab/runtime.hpp>
#include <relaylab/xcmp.hpp>

#include <memory>
#include <optional>
#include <unordered_map>

// Slot-based block production.
//
// Slots start at 1. Epoch m covers slots (m-1)R+1 .. mR. The lottery input of
// a slot is r_m || u64 slot and a validator is primary leader when its VRF
// value, read as a big-endian integer, is below tau * 2^256. Epoch randomness
// for m > 2 is hash(u64 m || VRF values of the primary blocks of epoch m-2 on
// the block's own ancestry, oldest first); epochs 1 and 2 use the genesis value.
namespace relaylab::babe {

enum class Claim : uint8_t { primary, secondary };

struct BlockHeader {
    Digest parent;
    uint64_t number = 0;
    uint64_t slot = 0;
    uint32_t author = 0;
    Digest state_root;
    Digest extrinsics_root;
    Claim claim = Claim::secondary;
    crypto::VrfOutput vrf; // zero for secondary claims
    crypto::Signature seal;

    // u8 tag 'H' | parent | u64 number | u64 slot | u32 author | state root |
    // extrinsics root | u8 claim | vrf value | vrf proof
    Bytes unsealed() const;
    Bytes encode() const; // unsealed() || seal
    Digest hash() const { return relaylab::hash(encode()); }
};

struct Block {
    BlockHeader header;
    runtime::Body body;
    // parachain headers included by this block together with their outboxes;
    // travels with the block as simulator side data
    std::shared_ptr<const xcmp::RelayEntry> relay_entry;
    Digest hash;
};

using BlockPtr = std::shared_ptr<const Block>;

BlockPtr make_genesis(const Digest& state_root);
BlockPtr seal_block(Block b, const crypto::SecretKey& author);

struct EpochParams {
    uint64_t length = 50; // R
    Ratio tau{1, 10};
    Digest genesis_randomness;
};

inline uint64_t epoch_of(uint64_t slot, uint64_t length) { return slot == 0 ? 0 : (slot - 1) / length + 1; }
inline uint64_t epoch_start(uint64_t m, uint64_t length) { return (m - 1) * length + 1; }

Bytes leader_input(const Digest& randomness, uint64_t slot);
std::optional<crypto::VrfOutput> slot_leader_check(const crypto::SecretKey& secret, const Digest& randomness,
                                                   uint64_t slot, Ratio tau);
uint32_t secondary_leader(const Digest& randomness, uint64_t slot, size_t validators);
Digest epoch_randomness(uint64_t m, std::span<const Digest> primary_vrf_values);

struct TreeEntry {
    BlockPtr block;
    TreeEntry* parent = nullptr;
    std::vector<TreeEntry*> children;
    uint64_t primary_count = 0; // primary blocks on the path from genesis, inclusive
    bool bad = false;           // reverted; excluded from fork choice with its subtree

    const Digest& hash() const { return block->hash; }
    uint64_t number() const { return block->header.number; }
    uint64_t slot() const { return block->header.slot; }
};

class BlockTree {
public:
    explicit BlockTree(BlockPtr genesis);
    BlockTree(const BlockTree&) = delete;
    BlockTree& operator=(const BlockTree&) = delete;

    // Throws orphan when the parent is unknown. Re-inserting is a no-op.
    const TreeEntry& insert(BlockPtr block);

    bool contains(const Digest& h) const { return entries_.contains(h); }
    const TreeEntry* find(const Digest& h) const;
    const TreeEntry& at(const Digest& h) const;
    const TreeEntry& genesis() const { return *genesis_; }
    size_t size() const { return entries_.size(); }

    // a == b or a is an ancestor of b
    bool is_ancestor(const Digest& a, const Digest& b) const;
    bool comparable(const Digest& a, const Digest& b) const { return is_ancestor(a, b) || is_ancestor(b, a); }
    const TreeEntry& ancestor_at(const TreeEntry& e, uint64_t number) const;
    const TreeEntry& lca(const TreeEntry& a, const TreeEntry& b) const;

    const Digest& last_finalized() const { return finalized_->hash(); }
    // Moves finality forward; throws fork_mismatch if `h` conflicts with it.
    void finalize(const Digest& h);

    void mark_bad(const Digest& h);
    bool is_bad(const Digest& h) const;

    // Head of the best chain below `base` (default: last finalized): most
    // primary blocks, then most blocks, then lowest hash. Bad subtrees are
    // skipped. The best head below the last finalized block is kept up to date
    // on insert.
    const TreeEntry& best_descendant(const Digest& base) const;
    const TreeEntry& best_head() const { return best_descendant(last_finalized()); }

    // Blocks from `from` (exclusive) down to `to` (inclusive), oldest first.
    std::vector<const TreeEntry*> path(const Digest& from, const Digest& to) const;

    Digest randomness_for(const TreeEntry& parent, uint64_t m, const EpochParams& p) const;

private:
    std::unordered_map<Digest, std::unique_ptr<TreeEntry>> entries_;
    const TreeEntry* genesis_ = nullptr;
    const TreeEntry* finalized_ = nullptr;
    mutable std::unordered_map<Digest, Digest> randomness_cache_;
    const TreeEntry* best_ = nullptr;

    bool under_finalized(const TreeEntry& e) const;
    const TreeEntry& scan_best(const TreeEntry& base) const;
};

// fork-choice order: true when `a` is preferred to `b`
bool better(const TreeEntry& a, const TreeEntry& b);

struct BuildInput {
    uint32_t author = 0;
    const crypto::KeyPair* keys = nullptr;
    uint64_t slot = 0;
    Claim claim = Claim::secondary;
    crypto::VrfOutput vrf;
    runtime::AccountId fee_account = 0;
    uint64_t timestamp = 0;
    std::vector<para::CandidateReceipt> candidates;
    std::vector<runtime::Extrinsic> transactions; // already selected within limits
    std::vector<xcmp::IncludedHeader> included;    // parachain headers for the side data
};

struct Built {
    BlockPtr block;
    trie::StateTrie state;
};

Built build_block(const TreeEntry& parent, const trie::StateTrie& parent_state, const runtime::Runtime& rt,
                  BuildInput in);

// Header checks: parent known (throws orphan otherwise), number and slot
// monotone, claim valid under the parent's view of epoch randomness, seal.
bool validate_header(const BlockHeader& h, const BlockTree& tree, const EpochParams& p,
                     std::span<const crypto::PublicKey> validators, const crypto::KeyRegistry& registry);

struct Arrival {
    uint64_t slot = 0;
    int64_t time = 0;
};

// Lower median of { t_j + T (target - slot_j) }. Throws no_data when empty.
int64_t relative_time_sync(std::span<const Arrival> arrivals, uint64_t target_slot, uint64_t slot_duration);

// Sync-epoch boundaries: the first finalized slot at least `gap` after the previous boundary.
class SyncEpochTracker {
public:
    explicit SyncEpochTracker(uint64_t gap, uint64_t first_boundary = 0) : gap_(gap), boundary_(first_boundary) {}
    bool on_finalized(uint64_t slot);
    uint64_t boundary() const { return boundary_; }
    uint64_t epochs() const { return epochs_; }

private:
    uint64_t gap_;
    uint64_t boundary_;
    uint64_t epochs_ = 0;
};

} // namespace relaylab::babe
