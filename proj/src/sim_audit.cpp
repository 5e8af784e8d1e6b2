// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sim_audit.hpp"

#include <memory>

namespace relaylab::sim {

namespace {

using xcmp::ParaId;

struct PathState {
    std::map<std::pair<ParaId, ParaId>, Digest> received; // (sender, receiver) -> last batch head taken
    std::map<ParaId, std::map<ParaId, Digest>> sent;      // sender -> committed heads
    xcmp::ForkView fork;
};

Digest head_for(const std::map<ParaId, Digest>& heads, ParaId d)
{
    auto it = heads.find(d);
    return it == heads.end() ? Digest{} : it->second;
}

const xcmp::IncludedHeader* included_by(const xcmp::RelayEntry& e, ParaId sender)
{
    for (const auto& h : e.included)
        if (h.para == sender)
            return &h;
    return nullptr;
}

bool same_commitment(const xcmp::OutboxCommitment& a, const xcmp::OutboxCommitment& b)
{
    return a.message_root == b.message_root && a.bitfield == b.bitfield && a.heads == b.heads;
}

} // namespace

void audit_xcmp(const XcmpInputs& in, MetricsReport& r)
{
    std::vector<uint64_t> latencies;
    std::vector<std::pair<const babe::TreeEntry*, std::shared_ptr<const PathState>>> stack;
    auto root = std::make_shared<PathState>();
    const auto& g = in.blocks->genesis();
    root->fork.blocks.push_back(g.block->relay_entry);
    for (const auto* c : g.children)
        stack.emplace_back(c, root);

    while (!stack.empty()) {
        auto [e, parent_state] = stack.back();
        stack.pop_back();
        if (in.skip.contains(e->hash()))
            continue;
        auto st = std::make_shared<PathState>(*parent_state);
        const auto& entry = *e->block->relay_entry;
        const auto& parent = *e->parent;
        bool on_reference = in.reference.contains(e->hash());

        for (const auto& h : entry.included) {
            // sender side: the commitment extends what this branch committed before
            if (h.prev_heads != st->sent[h.para])
                ++r.xcmp_fifo_violations;
            if (!same_commitment(xcmp::build_commitment(h.prev_heads, h.outbox), h.commitment))
                ++r.xcmp_batch_violations;
            st->sent[h.para] = h.commitment.heads;
            if (on_reference)
                for (const auto& [_, msgs] : h.outbox)
                    r.xcmp_sent += msgs.size();

            // receiver side
            auto before = para::HeadData::decode(in.head_at(parent.hash(), h.para));
            auto after = para::HeadData::decode(in.head_at(e->hash(), h.para));
            if (!(after.watermark > before.watermark))
                ++r.xcmp_watermark_violations;
            auto inbox = xcmp::next_inbox(h.para, before.watermark, st->fork, in.max_para, in.max_batches);
            auto digest = before.inbox_digest;
            for (const auto& b : inbox.batches) {
                const auto* src_entry = st->fork.find(b.relay_block);
                const auto* src = src_entry ? included_by(*src_entry, b.sender) : nullptr;
                if (!src) {
                    ++r.xcmp_fork_violations;
                    continue;
                }
                auto& last = st->received[{b.sender, h.para}];
                if (head_for(src->prev_heads, h.para) != last)
                    ++r.xcmp_fifo_violations;
                auto chained = last;
                for (const auto& m : b.messages)
                    chained = xcmp::chain_step(chained, m);
                auto out_it = src->outbox.find(h.para);
                bool whole = out_it != src->outbox.end() && out_it->second == b.messages;
                if (!whole || chained != b.batch_hash || head_for(src->commitment.heads, h.para) != b.batch_hash)
                    ++r.xcmp_batch_violations;
                last = b.batch_hash;
                for (const auto& m : b.messages)
                    digest = xcmp::chain_step(digest, m);
                if (on_reference) {
                    r.xcmp_delivered += b.messages.size();
                    for (size_t i = 0; i < b.messages.size(); ++i)
                        latencies.push_back(e->number() - b.relay_number);
                }
            }
            if (digest != after.inbox_digest || inbox.watermark != after.watermark)
                ++r.xcmp_fork_violations;
        }
        st->fork.blocks.push_back(e->block->relay_entry);
        for (const auto* c : e->children)
            stack.emplace_back(c, st);
    }
    r.xcmp_latency = Summary::of(std::move(latencies));
}

} // namespace relaylab::sim
