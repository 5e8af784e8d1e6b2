// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <relaylab/grandpa.hpp>

#include <json.hpp>

#include <unordered_map>

namespace relaylab::grandpa {

using babe::BlockTree;
using babe::TreeEntry;

std::string to_string(Stage s)
{
    return s == Stage::prevote ? "prevote" : "precommit";
}

Bytes SignedVote::message() const
{
    return ByteWriter().str("vote").u64(round).u8(static_cast<uint8_t>(stage)).raw(block.view()).u64(number).bytes();
}

SignedVote sign_vote(uint64_t round, Stage stage, const Digest& block, uint64_t number, VoterId voter,
                     const crypto::SecretKey& secret)
{
    SignedVote v{round, stage, block, number, voter, {}};
    v.sig = crypto::sign(secret, v.message());
    return v;
}

Bytes PrimaryProposal::message() const
{
    return ByteWriter().str("primary").u64(round).raw(block.view()).u64(number).bytes();
}

VoterSet VoterSet::equal(std::vector<crypto::PublicKey> keys)
{
    VoterSet s;
    s.weights.assign(keys.size(), 1);
    s.keys = std::move(keys);
    return s;
}

uint64_t VoterSet::total() const
{
    uint64_t t = 0;
    for (auto w : weights)
        t += w;
    return t;
}

VoterId VoterSet::primary_for_round(uint64_t round) const
{
    if (keys.empty())
        throw Error(ErrorKind::config, "empty voter set");
    return static_cast<VoterId>(round % keys.size());
}

bool VoterSet::verify(const SignedVote& v, const crypto::KeyRegistry& registry) const
{
    return contains(v.voter) && registry.verify(keys[v.voter], v.message(), v.sig);
}

VoteSet::Added VoteSet::add(const SignedVote& v, std::optional<EquivocationReport>* report)
{
    if (v.round != round_ || v.stage != stage_ || !voters_->contains(v.voter))
        return Added::ignored;
    auto it = first_.find(v.voter);
    if (it == first_.end()) {
        first_.emplace(v.voter, v);
        return Added::counted;
    }
    if (it->second.same_target(v))
        return Added::duplicate;
    if (second_.contains(v.voter))
        return second_.at(v.voter).same_target(v) ? Added::duplicate : Added::ignored;
    second_.emplace(v.voter, v);
    if (report)
        *report = EquivocationReport{it->second, v};
    return Added::equivocation;
}

uint64_t VoteSet::equivocator_weight() const
{
    uint64_t w = 0;
    for (const auto& [id, _] : second_)
        w += voters_->weights[id];
    return w;
}

uint64_t VoteSet::voted_weight() const
{
    uint64_t w = 0;
    for (const auto& [id, _] : first_)
        w += voters_->weights[id];
    return w;
}

std::vector<SignedVote> VoteSet::all_votes() const
{
    std::vector<SignedVote> out;
    for (const auto& [_, v] : first_)
        out.push_back(v);
    for (const auto& [_, v] : second_)
        out.push_back(v);
    return out;
}

namespace {

using Weights = std::unordered_map<const TreeEntry*, uint64_t>;

// Honest (non-equivocator) weight accumulated on `base` and every block below it.
Weights weights_below(const VoteSet& votes, const BlockTree& tree, const TreeEntry& base)
{
    Weights w;
    std::vector<const TreeEntry*> path;
    for (const auto& [id, v] : votes.votes()) {
        if (votes.is_equivocator(id))
            continue;
        const auto* e = tree.find(v.block);
        if (!e || e->number() < base.number())
            continue;
        path.clear();
        for (; e->number() > base.number(); e = e->parent)
            path.push_back(e);
        if (e != &base)
            continue;
        path.push_back(e);
        for (const auto* p : path)
            w[p] += votes.voters().weights[id];
    }
    return w;
}

uint64_t at(const Weights& w, const TreeEntry* e)
{
    auto it = w.find(e);
    return it == w.end() ? 0 : it->second;
}

std::optional<const TreeEntry*> ghost_entry(const VoteSet& votes, const TreeEntry& base,
                                            const Weights& w)
{
    uint64_t eq = votes.equivocator_weight();
    uint64_t total = votes.voters().total();
    if (!supermajority(at(w, &base) + eq, total))
        return std::nullopt;
    const TreeEntry* cur = &base;
    for (;;) {
        const TreeEntry* next = nullptr;
        int qualifying = 0;
        for (const auto* c : cur->children)
            if (supermajority(at(w, c) + eq, total)) {
                next = c;
                ++qualifying;
            }
        if (qualifying != 1)
            return cur;
        cur = next;
    }
}

} // namespace

uint64_t descendant_weight(const VoteSet& votes, const BlockTree& tree, const Digest& b)
{
    uint64_t w = votes.equivocator_weight();
    for (const auto& [id, v] : votes.votes())
        if (!votes.is_equivocator(id) && tree.is_ancestor(b, v.block))
            w += votes.voters().weights[id];
    return w;
}

std::optional<Digest> ghost(const VoteSet& votes, const BlockTree& tree, const Digest& base)
{
    const auto& b = tree.at(base);
    auto g = ghost_entry(votes, b, weights_below(votes, tree, b));
    if (!g)
        return std::nullopt;
    return (*g)->hash();
}

Digest ghost_2_3(const VoteSet& votes, const BlockTree& tree, const Digest& base)
{
    return ghost(votes, tree, base).value_or(base);
}

RoundView round_view(const VoteSet& prevotes, const VoteSet& precommits, const BlockTree& tree, const Digest& base)
{
    RoundView view;
    view.estimate = base;
    const auto& b = tree.at(base);
    auto wc = weights_below(precommits, tree, b);
    if (auto gc = ghost_entry(precommits, b, wc))
        view.precommit_ghost = (*gc)->hash();
    auto gv = ghost_entry(prevotes, b, weights_below(prevotes, tree, b));
    if (!gv)
        return view;
    view.prevote_ghost = (*gv)->hash();

    uint64_t total = precommits.voters().total();
    uint64_t open = total - precommits.voted_weight() + precommits.equivocator_weight();
    auto possible = [&](const TreeEntry* e) { return supermajority(at(wc, e) + open, total); };

    const TreeEntry* e = *gv;
    while (e != &b && !possible(e))
        e = e->parent;
    view.estimate = e->hash();

    if (!view.precommit_ghost)
        return view;
    if (e != *gv) {
        view.completable = true;
        return view;
    }
    view.completable = std::none_of((*gv)->children.begin(), (*gv)->children.end(), possible);
    return view;
}

std::string Justification::to_json() const
{
    nlohmann::json j;
    j["round"] = round;
    j["block"] = block.hex();
    j["number"] = number;
    j["precommits"] = nlohmann::json::array();
    for (const auto& v : precommits)
        j["precommits"].push_back(
            {{"voter", v.voter}, {"block", v.block.hex()}, {"number", v.number}, {"sig", v.sig.bytes.hex()}});
    return j.dump();
}

Justification Justification::from_json(std::string_view text)
{
    try {
        auto j = nlohmann::json::parse(text);
        Justification out;
        out.round = j.at("round").get<uint64_t>();
        out.block = Digest::from_hex(j.at("block").get<std::string>());
        out.number = j.at("number").get<uint64_t>();
        for (const auto& v : j.at("precommits"))
            out.precommits.push_back({out.round, Stage::precommit, Digest::from_hex(v.at("block").get<std::string>()),
                                      v.at("number").get<uint64_t>(), v.at("voter").get<VoterId>(),
                                      {Digest::from_hex(v.at("sig").get<std::string>())}});
        return out;
    } catch (const Error& e) {
        throw Error(ErrorKind::decode, std::string("justification: ") + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::decode, std::string("justification: ") + e.what());
    }
}

bool verify_justification(const Justification& j, const VoterSet& voters, const crypto::KeyRegistry& registry,
                          const BlockTree& tree)
{
    VoteSet set(j.round, Stage::precommit, voters);
    for (const auto& v : j.precommits) {
        if (v.round != j.round || v.stage != Stage::precommit || !voters.verify(v, registry))
            return false;
        set.add(v);
    }
    const auto* e = tree.find(j.block);
    if (e && e->number() != j.number)
        return false;
    return supermajority(descendant_weight(set, tree, j.block), voters.total());
}

AuditResult audit(const Justification& a, const Justification& b, const VoterSet& voters)
{
    AuditResult r;
    r.same_round = a.round == b.round;
    std::map<VoterId, std::set<Digest>> seen_a, seen_b;
    for (const auto& v : a.precommits)
        seen_a[v.voter].insert(v.block);
    for (const auto& v : b.precommits)
        seen_b[v.voter].insert(v.block);
    for (const auto& [id, blocks] : seen_a) {
        auto it = seen_b.find(id);
        if (it == seen_b.end() || !voters.contains(id))
            continue;
        if (r.same_round) {
            auto all = blocks;
            all.insert(it->second.begin(), it->second.end());
            if (all.size() < 2)
                continue;
        }
        r.culprits.insert(id);
        r.weight += voters.weights[id];
    }
    return r;
}

Voter::Voter(std::optional<VoterId> self, const crypto::KeyPair* keys, const VoterSet& voters,
             const crypto::KeyRegistry& registry, BlockTree& tree, VoterConfig cfg, Votable votable)
    : self_(self), keys_(keys), voters_(&voters), registry_(&registry), tree_(&tree), cfg_(cfg),
      votable_(std::move(votable))
{
    if (self_ && (!keys_ || !voters.contains(*self_)))
        throw Error(ErrorKind::config, "voter without keys or outside the voter set");
}

Voter::Round& Voter::round_state(uint64_t r)
{
    auto it = rounds_.find(r);
    if (it == rounds_.end())
        it = rounds_
                 .emplace(r, Round{r, 0, VoteSet(r, Stage::prevote, *voters_), VoteSet(r, Stage::precommit, *voters_),
                                   {}, false, false, false, {}})
                 .first;
    return it->second;
}

void Voter::start(uint64_t now, Outbox& out)
{
    auto& zero = round_state(0);
    zero.prevoted = zero.precommitted = true;
    zero.view = {tree_->last_finalized(), tree_->last_finalized(), tree_->last_finalized(), true};
    begin_round(1, now, out);
    progress(now, out);
}

void Voter::refresh(Round& rs)
{
    if (rs.number == 0)
        return;
    rs.view = round_view(rs.prevotes, rs.precommits, *tree_, tree_->last_finalized());
}

Digest Voter::prev_estimate(uint64_t r) const
{
    const auto& e = rounds_.at(r - 1).view.estimate;
    const auto& f = tree_->last_finalized();
    return descends(e, f) ? f : e;
}

std::optional<Digest> Voter::prev_prevote_ghost(uint64_t r) const
{
    return rounds_.at(r - 1).view.prevote_ghost;
}

Digest Voter::best_votable_containing(const Digest& b) const
{
    const auto& head = tree_->best_descendant(b);
    Digest last = b;
    for (const auto* e : tree_->path(b, head.hash())) {
        if (votable_ && !votable_(*e))
            break;
        last = e->hash();
    }
    return last;
}

void Voter::begin_round(uint64_t r, uint64_t now, Outbox& out)
{
    current_ = r;
    auto& rs = round_state(r);
    rs.start = now;
    refresh(rs);
    if (self_ && voters_->primary_for_round(r) == *self_ && !rs.proposed) {
        rs.proposed = true;
        auto est = prev_estimate(r);
        PrimaryProposal p{r, est, tree_->at(est).number(), *self_, {}};
        p.sig = crypto::sign(keys_->secret, p.message());
        rs.proposal = p;
        out.broadcast.emplace_back(p);
    }
}

bool Voter::accept_vote(const SignedVote& v, Outbox& out)
{
    if (!voters_->verify(v, *registry_))
        return true;
    if (v.round > current_ || !tree_->contains(v.block))
        return false;
    if (!tree_->comparable(v.block, tree_->last_finalized()))
        return true;
    auto& rs = round_state(v.round);
    std::optional<EquivocationReport> report;
    auto& set = v.stage == Stage::prevote ? rs.prevotes : rs.precommits;
    auto added = set.add(v, &report);
    if (report)
        out.reports.push_back(*report);
    if (added == VoteSet::Added::counted || added == VoteSet::Added::equivocation) {
        refresh(rs);
        if (v.stage == Stage::precommit)
            try_finalize(rs, out);
    }
    return true;
}

void Voter::try_finalize(Round& rs, Outbox& out)
{
    if (!rs.view.precommit_ghost)
        return;
    const auto& g = *rs.view.precommit_ghost;
    const auto& f = tree_->last_finalized();
    if (g == f || descends(g, f))
        return;
    Justification j{rs.number, g, tree_->at(g).number(), rs.precommits.all_votes()};
    finalize(g, rs.number, std::move(j), true, out);
}

void Voter::finalize(const Digest& block, uint64_t round, Justification j, bool from_round, Outbox& out)
{
    const auto& f = tree_->last_finalized();
    if (!descends(f, block)) {
        if (!descends(block, f)) {
            alarmed_ = true;
            out.alarms.push_back({f, block, round});
        }
        return;
    }
    tree_->finalize(block);
    FinalizedEntry entry{block, tree_->at(block).number(), round, std::move(j)};
    if (from_round)
        out.broadcast.emplace_back(Commit{entry.justification});
    log_.push_back(entry);
    out.finalized.push_back(std::move(entry));
    for (auto& [_, rs] : rounds_)
        if (rs.number + 1 >= current_)
            refresh(rs);
}

void Voter::apply_commit(const Commit& c, uint64_t now, Outbox& out)
{
    const auto& j = c.justification;
    if (!verify_justification(j, *voters_, *registry_, *tree_))
        return;
    finalize(j.block, j.round, j, false, out);
    if (j.round >= current_ && tree_->last_finalized() == j.block) {
        auto& rs = round_state(j.round);
        rs.prevoted = rs.precommitted = true;
        refresh(rs);
        rs.view.completable = true;
        begin_round(j.round + 1, now, out);
    }
}

void Voter::on_message(const Message& m, uint64_t now, Outbox& out)
{
    pending_.push_back(m);
    on_block_imported(now, out);
}

void Voter::on_block_imported(uint64_t now, Outbox& out)
{
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<Message> keep;
        auto work = std::move(pending_);
        pending_.clear();
        for (auto& m : work) {
            bool done = std::visit(
                [&](const auto& msg) -> bool {
                    using T = std::decay_t<decltype(msg)>;
                    if constexpr (std::is_same_v<T, SignedVote>) {
                        return accept_vote(msg, out);
                    } else if constexpr (std::is_same_v<T, PrimaryProposal>) {
                        if (msg.voter != voters_->primary_for_round(msg.round) ||
                            !registry_->verify(voters_->keys[msg.voter], msg.message(), msg.sig))
                            return true;
                        if (msg.round > current_ || !tree_->contains(msg.block))
                            return false;
                        auto& rs = round_state(msg.round);
                        if (!rs.proposal)
                            rs.proposal = msg;
                        return true;
                    } else {
                        for (const auto& v : msg.justification.precommits)
                            if (!tree_->contains(v.block))
                                return false;
                        if (!tree_->contains(msg.justification.block))
                            return false;
                        auto before = current_;
                        apply_commit(msg, now, out);
                        changed |= current_ != before;
                        return true;
                    }
                },
                m);
            if (!done)
                keep.push_back(std::move(m));
        }
        keep.insert(keep.end(), std::make_move_iterator(pending_.begin()), std::make_move_iterator(pending_.end()));
        pending_ = std::move(keep);
        auto before = current_;
        progress(now, out);
        changed |= current_ != before;
    }
}

void Voter::on_tick(uint64_t now, Outbox& out)
{
    auto before = current_;
    progress(now, out);
    if (current_ != before)
        on_block_imported(now, out);
}

void Voter::progress(uint64_t now, Outbox& out)
{
    for (;;) {
        auto& rs = round_state(current_);
        if (self_) {
            if (!rs.prevoted && (now >= rs.start + 2 * cfg_.delta || rs.view.completable)) {
                auto est = prev_estimate(current_);
                auto target = est;
                auto prev_g = prev_prevote_ghost(current_);
                if (rs.proposal && tree_->contains(rs.proposal->block) && descends(est, rs.proposal->block) && prev_g &&
                    descends(rs.proposal->block, *prev_g))
                    target = rs.proposal->block;
                auto head = best_votable_containing(target);
                auto v = sign_vote(current_, Stage::prevote, head, tree_->at(head).number(), *self_, keys_->secret);
                rs.prevoted = true;
                out.broadcast.emplace_back(v);
                accept_vote(v, out);
            }
            const auto& g = rs.view.prevote_ghost;
            if (rs.prevoted && !rs.precommitted && g && descends(prev_estimate(current_), *g) &&
                (now >= rs.start + 4 * cfg_.delta || rs.view.completable)) {
                auto v = sign_vote(current_, Stage::precommit, *g, tree_->at(*g).number(), *self_, keys_->secret);
                rs.precommitted = true;
                out.broadcast.emplace_back(v);
                accept_vote(v, out);
            }
        }
        bool done_here = !self_ || rs.precommitted || now >= rs.start + 4 * cfg_.delta;
        if (!(rs.view.completable && done_here))
            return;
        begin_round(current_ + 1, now, out);
    }
}

const VoteSet* Voter::votes(uint64_t round, Stage s) const
{
    auto it = rounds_.find(round);
    if (it == rounds_.end())
        return nullptr;
    return s == Stage::prevote ? &it->second.prevotes : &it->second.precommits;
}

const RoundView* Voter::view(uint64_t round) const
{
    auto it = rounds_.find(round);
    return it == rounds_.end() ? nullptr : &it->second.view;
}

std::optional<uint64_t> Voter::next_deadline() const
{
    const auto& rs = rounds_.at(current_);
    if (self_ && !rs.prevoted)
        return rs.start + 2 * cfg_.delta;
    if (!rs.precommitted || self_ == std::nullopt)
        return rs.start + 4 * cfg_.delta;
    return std::nullopt;
}

} // namespace relaylab::grandpa
