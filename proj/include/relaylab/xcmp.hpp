// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <relaylab/merkle.hpp>

#include <compare>
#include <map>
#include <memory>
#include <set>

// Cross-chain message passing.
//
//   chain step  : head' = hash(head || hash(message)), empty head = 32 zero bytes
//   head leaf   : hash(0x00 || u32 destination || head)
//   message root: Merkle root over head leaves sorted by destination
namespace relaylab::xcmp {

using ParaId = uint32_t;
using Message = Bytes;

Digest chain_step(const Digest& head, ByteView message);
Digest head_leaf(ParaId destination, const Digest& head);

struct OutboxCommitment {
    Digest message_root;
    std::set<ParaId> bitfield; // destinations that received messages in this block
    std::map<ParaId, Digest> heads;

    bool sent_to(ParaId d) const { return bitfield.contains(d); }
};

using Outgoing = std::map<ParaId, std::vector<Message>>;

OutboxCommitment build_commitment(const std::map<ParaId, Digest>& prev_heads, const Outgoing& outgoing);

// A destination may refuse a sender outright; any message to it makes the
// sender's candidate invalid.
using Blocklist = std::map<ParaId, std::set<ParaId>>; // destination -> blocked senders
bool respects_blocklist(ParaId sender, const Outgoing& outgoing, const Blocklist& blocked);

// Processing cursor of a receiver. Ordered by relay number, then sender id.
struct Watermark {
    uint64_t relay_number = 0;
    ParaId sender = 0;
    auto operator<=>(const Watermark&) const = default;
};

// A parachain header as included in a relay block, with the outbox bodies the
// simulator delivers alongside it.
struct IncludedHeader {
    ParaId para = 0;
    Digest para_block;
    OutboxCommitment commitment;
    std::map<ParaId, Digest> prev_heads;
    Outgoing outbox;
};

struct RelayEntry {
    uint64_t number = 0;
    Digest hash;
    std::vector<IncludedHeader> included;
};

// A contiguous stretch of one relay chain ending at its head, in order.
struct ForkView {
    std::vector<std::shared_ptr<const RelayEntry>> blocks;

    bool contains(const Digest& relay_block) const;
    const RelayEntry* find(const Digest& relay_block) const;
    uint64_t head_number() const { return blocks.empty() ? 0 : blocks.back()->number; }
};

struct MessageProof {
    ParaId sender = 0;
    ParaId receiver = 0;
    Digest relay_block;
    Digest prev_head;
    std::vector<Message> messages;
    merkle::Proof path; // from head_leaf(receiver, new head) to the message root
};

MessageProof prove_messages(const IncludedHeader& header, ParaId receiver, const Digest& relay_block);

// Throws fork_mismatch when relay_block is not on `fork`.
bool verify_messages(const MessageProof& proof, const ForkView& fork);

struct Batch {
    ParaId sender = 0;
    uint64_t relay_number = 0;
    Digest relay_block;
    std::vector<Message> messages;
    Digest batch_hash; // chain head after the batch; equals the sender's committed head
};

struct Inbox {
    std::vector<Batch> batches;
    Watermark watermark;
};

// Delivers pending sender blocks after `from`, ordered by (relay number,
// sender id), at most `max_batches` of them. When nothing is pending the
// watermark moves to (head number, max_para).
Inbox next_inbox(ParaId receiver, Watermark from, const ForkView& fork, ParaId max_para,
                 size_t max_batches = SIZE_MAX);

} // namespace relaylab::xcmp
