// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <relaylab/babe.hpp>

#include <algorithm>

namespace relaylab::babe {

Bytes BlockHeader::unsealed() const
{
    return ByteWriter()
        .u8('H')
        .raw(parent.view())
        .u64(number)
        .u64(slot)
        .u32(author)
        .raw(state_root.view())
        .raw(extrinsics_root.view())
        .u8(static_cast<uint8_t>(claim))
        .raw(vrf.value.view())
        .raw(vrf.proof.view())
        .bytes();
}

Bytes BlockHeader::encode() const
{
    auto b = unsealed();
    b.insert(b.end(), seal.bytes.bytes.begin(), seal.bytes.bytes.end());
    return b;
}

BlockPtr make_genesis(const Digest& state_root)
{
    Block b;
    b.header.state_root = state_root;
    b.hash = b.header.hash();
    b.relay_entry = std::make_shared<const xcmp::RelayEntry>(xcmp::RelayEntry{0, b.hash, {}});
    return std::make_shared<const Block>(std::move(b));
}

BlockPtr seal_block(Block b, const crypto::SecretKey& author)
{
    b.header.seal = crypto::sign(author, b.header.unsealed());
    b.hash = b.header.hash();
    return std::make_shared<const Block>(std::move(b));
}

Bytes leader_input(const Digest& randomness, uint64_t slot)
{
    return ByteWriter().raw(randomness.view()).u64(slot).bytes();
}

std::optional<crypto::VrfOutput> slot_leader_check(const crypto::SecretKey& secret, const Digest& randomness,
                                                   uint64_t slot, Ratio tau)
{
    if (tau.num == 0)
        return std::nullopt;
    auto out = crypto::vrf_eval(secret, leader_input(randomness, slot));
    if (tau.num >= tau.den || crypto::vrf_below(out, tau.num, tau.den))
        return out;
    return std::nullopt;
}

uint32_t secondary_leader(const Digest& randomness, uint64_t slot, size_t validators)
{
    if (validators == 0)
        throw Error(ErrorKind::config, "empty validator set");
    auto h = hash({as_view("secondary"), randomness.view(), ByteWriter().u64(slot).bytes()});
    ByteReader r(h.view());
    return static_cast<uint32_t>(r.u64() % validators);
}

Digest epoch_randomness(uint64_t m, std::span<const Digest> primary_vrf_values)
{
    ByteWriter w;
    w.u64(m);
    for (const auto& v : primary_vrf_values)
        w.raw(v.view());
    return hash(w.bytes());
}

BlockTree::BlockTree(BlockPtr genesis)
{
    auto e = std::make_unique<TreeEntry>();
    e->block = std::move(genesis);
    genesis_ = finalized_ = best_ = e.get();
    auto h = e->hash();
    entries_.emplace(h, std::move(e));
}

const TreeEntry& BlockTree::insert(BlockPtr block)
{
    if (auto it = entries_.find(block->hash); it != entries_.end())
        return *it->second;
    auto pit = entries_.find(block->header.parent);
    if (pit == entries_.end())
        throw Error(ErrorKind::orphan, "unknown parent " + block->header.parent.hex());
    auto e = std::make_unique<TreeEntry>();
    e->parent = pit->second.get();
    e->primary_count = e->parent->primary_count + (block->header.claim == Claim::primary ? 1 : 0);
    e->bad = e->parent->bad;
    e->block = std::move(block);
    auto* raw = e.get();
    e->parent->children.push_back(raw);
    entries_.emplace(raw->hash(), std::move(e));
    if (!raw->bad && better(*raw, *best_) && under_finalized(*raw))
        best_ = raw;
    return *raw;
}

const TreeEntry* BlockTree::find(const Digest& h) const
{
    auto it = entries_.find(h);
    return it == entries_.end() ? nullptr : it->second.get();
}

const TreeEntry& BlockTree::at(const Digest& h) const
{
    auto* e = find(h);
    if (!e)
        throw Error(ErrorKind::key_absent, "unknown block " + h.hex());
    return *e;
}

const TreeEntry& BlockTree::ancestor_at(const TreeEntry& e, uint64_t number) const
{
    const TreeEntry* cur = &e;
    while (cur->number() > number)
        cur = cur->parent;
    return *cur;
}

bool BlockTree::is_ancestor(const Digest& a, const Digest& b) const
{
    auto* ea = find(a);
    auto* eb = find(b);
    if (!ea || !eb || ea->number() > eb->number())
        return false;
    return &ancestor_at(*eb, ea->number()) == ea;
}

const TreeEntry& BlockTree::lca(const TreeEntry& a, const TreeEntry& b) const
{
    const TreeEntry* x = &a;
    const TreeEntry* y = &b;
    if (x->number() > y->number())
        x = &ancestor_at(*x, y->number());
    else
        y = &ancestor_at(*y, x->number());
    while (x != y) {
        x = x->parent;
        y = y->parent;
    }
    return *x;
}

void BlockTree::finalize(const Digest& h)
{
    const auto& e = at(h);
    if (!is_ancestor(finalized_->hash(), h)) {
        if (is_ancestor(h, finalized_->hash()))
            return;
        throw Error(ErrorKind::fork_mismatch, "finalizing " + h.hex() + " conflicts with finalized chain");
    }
    finalized_ = &e;
    if (!under_finalized(*best_))
        best_ = &scan_best(e);
}

void BlockTree::mark_bad(const Digest& h)
{
    auto it = entries_.find(h);
    if (it == entries_.end())
        return;
    std::vector<TreeEntry*> stack{it->second.get()};
    while (!stack.empty()) {
        auto* e = stack.back();
        stack.pop_back();
        e->bad = true;
        stack.insert(stack.end(), e->children.begin(), e->children.end());
    }
    best_ = &scan_best(*finalized_);
}

bool BlockTree::is_bad(const Digest& h) const
{
    auto* e = find(h);
    return e && e->bad;
}

bool better(const TreeEntry& a, const TreeEntry& b)
{
    if (a.primary_count != b.primary_count)
        return a.primary_count > b.primary_count;
    if (a.number() != b.number())
        return a.number() > b.number();
    return a.hash() < b.hash();
}

bool BlockTree::under_finalized(const TreeEntry& e) const
{
    return finalized_ == genesis_ || (e.number() >= finalized_->number() && &ancestor_at(e, finalized_->number()) == finalized_);
}

const TreeEntry& BlockTree::scan_best(const TreeEntry& base) const
{
    const TreeEntry* best = &base;
    std::vector<const TreeEntry*> stack{&base};
    while (!stack.empty()) {
        auto* e = stack.back();
        stack.pop_back();
        if (better(*e, *best))
            best = e;
        for (auto* c : e->children)
            if (!c->bad)
                stack.push_back(c);
    }
    return *best;
}

const TreeEntry& BlockTree::best_descendant(const Digest& base) const
{
    const auto& b = at(base);
    if (&b == finalized_ || (best_->number() >= b.number() && &ancestor_at(*best_, b.number()) == &b))
        return *best_;
    return scan_best(b);
}

std::vector<const TreeEntry*> BlockTree::path(const Digest& from, const Digest& to) const
{
    std::vector<const TreeEntry*> out;
    const auto& f = at(from);
    for (const TreeEntry* cur = &at(to); cur != &f; cur = cur->parent) {
        if (!cur->parent)
            throw Error(ErrorKind::fork_mismatch, "path endpoints are not on one chain");
        out.push_back(cur);
    }
    std::reverse(out.begin(), out.end());
    return out;
}

Digest BlockTree::randomness_for(const TreeEntry& parent, uint64_t m, const EpochParams& p) const
{
    if (m <= 2)
        return p.genesis_randomness;
    uint64_t end = (m - 2) * p.length;
    uint64_t start = epoch_start(m - 2, p.length);
    const TreeEntry* anchor = &parent;
    while (anchor->slot() > end)
        anchor = anchor->parent;
    auto key = hash({anchor->hash().view(), ByteWriter().u64(m).bytes()});
    if (auto it = randomness_cache_.find(key); it != randomness_cache_.end())
        return it->second;
    std::vector<Digest> values;
    for (const TreeEntry* cur = anchor; cur && cur->slot() >= start && cur->number() > 0; cur = cur->parent)
        if (cur->block->header.claim == Claim::primary)
            values.push_back(cur->block->header.vrf.value);
    std::reverse(values.begin(), values.end());
    auto r = epoch_randomness(m, values);
    randomness_cache_.emplace(key, r);
    return r;
}

Built build_block(const TreeEntry& parent, const trie::StateTrie& parent_state, const runtime::Runtime& rt,
                  BuildInput in)
{
    runtime::Body body{in.fee_account, {runtime::make_timestamp(in.timestamp)}};
    if (!in.candidates.empty())
        body.extrinsics.push_back(runtime::make_candidates(in.candidates));
    for (auto& t : in.transactions)
        body.extrinsics.push_back(std::move(t));
    auto state = rt.execute(parent_state, body);

    Block b;
    b.header.parent = parent.hash();
    b.header.number = parent.number() + 1;
    b.header.slot = in.slot;
    b.header.author = in.author;
    b.header.state_root = state.root();
    b.header.extrinsics_root = body.extrinsics_root();
    b.header.claim = in.claim;
    if (in.claim == Claim::primary)
        b.header.vrf = in.vrf;
    b.body = std::move(body);
    b.header.seal = crypto::sign(in.keys->secret, b.header.unsealed());
    b.hash = b.header.hash();
    b.relay_entry =
        std::make_shared<const xcmp::RelayEntry>(xcmp::RelayEntry{b.header.number, b.hash, std::move(in.included)});
    return {std::make_shared<const Block>(std::move(b)), std::move(state)};
}

bool validate_header(const BlockHeader& h, const BlockTree& tree, const EpochParams& p,
                     std::span<const crypto::PublicKey> validators, const crypto::KeyRegistry& registry)
{
    const auto* parent = tree.find(h.parent);
    if (!parent)
        throw Error(ErrorKind::orphan, "unknown parent " + h.parent.hex());
    if (h.number != parent->number() + 1 || h.slot <= parent->slot() || h.author >= validators.size())
        return false;
    const auto& pub = validators[h.author];
    if (!registry.verify(pub, h.unsealed(), h.seal))
        return false;
    auto r = tree.randomness_for(*parent, epoch_of(h.slot, p.length), p);
    if (h.claim == Claim::primary) {
        if (!registry.vrf_verify(pub, leader_input(r, h.slot), h.vrf))
            return false;
        return p.tau.num >= p.tau.den || crypto::vrf_below(h.vrf, p.tau.num, p.tau.den);
    }
    return h.vrf == crypto::VrfOutput{} && secondary_leader(r, h.slot, validators.size()) == h.author;
}

int64_t relative_time_sync(std::span<const Arrival> arrivals, uint64_t target_slot, uint64_t slot_duration)
{
    if (arrivals.empty())
        throw Error(ErrorKind::no_data, "no arrivals in the closing sync epoch");
    std::vector<int64_t> c;
    c.reserve(arrivals.size());
    for (const auto& a : arrivals)
        c.push_back(a.time + static_cast<int64_t>(slot_duration) *
                                 (static_cast<int64_t>(target_slot) - static_cast<int64_t>(a.slot)));
    auto mid = c.begin() + static_cast<std::ptrdiff_t>((c.size() - 1) / 2);
    std::nth_element(c.begin(), mid, c.end());
    return *mid;
}

bool SyncEpochTracker::on_finalized(uint64_t slot)
{
    if (slot <= boundary_ || slot - boundary_ < gap_)
        return false;
    boundary_ = slot;
    ++epochs_;
    return true;
}

} // namespace relaylab::babe
