// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <relaylab/xcmp.hpp>

namespace relaylab::xcmp {

Digest chain_step(const Digest& head, ByteView message)
{
    auto m = hash(message);
    return hash({head.view(), m.view()});
}

Digest head_leaf(ParaId destination, const Digest& head)
{
    auto prefix = ByteWriter().u8(0).u32(destination).bytes();
    return hash({prefix, head.view()});
}

namespace {

std::vector<Digest> leaves_of(const std::map<ParaId, Digest>& heads)
{
    std::vector<Digest> leaves;
    for (const auto& [d, h] : heads)
        leaves.push_back(head_leaf(d, h));
    return leaves;
}

uint32_t position_of(const std::map<ParaId, Digest>& heads, ParaId d)
{
    return static_cast<uint32_t>(std::distance(heads.begin(), heads.find(d)));
}

} // namespace

OutboxCommitment build_commitment(const std::map<ParaId, Digest>& prev_heads, const Outgoing& outgoing)
{
    OutboxCommitment c;
    c.heads = prev_heads;
    for (const auto& [d, msgs] : outgoing) {
        if (msgs.empty())
            continue;
        auto [it, _] = c.heads.try_emplace(d, Digest{});
        for (const auto& m : msgs)
            it->second = chain_step(it->second, m);
        c.bitfield.insert(d);
    }
    c.message_root = merkle::root(leaves_of(c.heads));
    return c;
}

bool respects_blocklist(ParaId sender, const Outgoing& outgoing, const Blocklist& blocked)
{
    for (const auto& [d, msgs] : outgoing) {
        if (msgs.empty())
            continue;
        auto it = blocked.find(d);
        if (it != blocked.end() && it->second.contains(sender))
            return false;
    }
    return true;
}

const RelayEntry* ForkView::find(const Digest& relay_block) const
{
    for (const auto& b : blocks)
        if (b->hash == relay_block)
            return b.get();
    return nullptr;
}

bool ForkView::contains(const Digest& relay_block) const { return find(relay_block) != nullptr; }

MessageProof prove_messages(const IncludedHeader& header, ParaId receiver, const Digest& relay_block)
{
    MessageProof p;
    p.sender = header.para;
    p.receiver = receiver;
    p.relay_block = relay_block;
    auto prev = header.prev_heads.find(receiver);
    p.prev_head = prev == header.prev_heads.end() ? Digest{} : prev->second;
    auto out = header.outbox.find(receiver);
    if (out != header.outbox.end())
        p.messages = out->second;
    const auto& heads = header.commitment.heads;
    if (!heads.contains(receiver))
        throw Error(ErrorKind::key_absent, "no chain head for receiver");
    p.path = merkle::prove(leaves_of(heads), position_of(heads, receiver));
    return p;
}

bool verify_messages(const MessageProof& proof, const ForkView& fork)
{
    const auto* entry = fork.find(proof.relay_block);
    if (!entry)
        throw Error(ErrorKind::fork_mismatch, "relay block not on this fork");
    const IncludedHeader* header = nullptr;
    for (const auto& h : entry->included)
        if (h.para == proof.sender)
            header = &h;
    if (!header)
        return false;
    Digest head = proof.prev_head;
    for (const auto& m : proof.messages)
        head = chain_step(head, m);
    return merkle::verify(header->commitment.message_root, head_leaf(proof.receiver, head), proof.path);
}

Inbox next_inbox(ParaId receiver, Watermark from, const ForkView& fork, ParaId max_para, size_t max_batches)
{
    Inbox inbox;
    inbox.watermark = from;
    for (const auto& ptr : fork.blocks) {
        const auto& entry = *ptr;
        if (entry.number < from.relay_number)
            continue;
        // included headers sorted by sender id for the canonical order
        std::vector<const IncludedHeader*> senders;
        for (const auto& h : entry.included)
            senders.push_back(&h);
        std::sort(senders.begin(), senders.end(), [](auto* a, auto* b) { return a->para < b->para; });
        for (const auto* h : senders) {
            Watermark pos{entry.number, h->para};
            if (pos <= from || !h->commitment.sent_to(receiver))
                continue;
            if (inbox.batches.size() == max_batches)
                return inbox;
            Batch b;
            b.sender = h->para;
            b.relay_number = entry.number;
            b.relay_block = entry.hash;
            b.messages = h->outbox.at(receiver);
            b.batch_hash = h->commitment.heads.at(receiver);
            inbox.batches.push_back(std::move(b));
            inbox.watermark = pos;
        }
    }
    if (inbox.batches.empty())
        inbox.watermark = std::max(from, Watermark{fork.head_number(), max_para});
    return inbox;
}

} // namespace relaylab::xcmp
