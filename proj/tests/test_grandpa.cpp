// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <relaylab/grandpa.hpp>

#include <gtest/gtest.h>

#include <deque>
#include <random>

using namespace relaylab;
using namespace relaylab::grandpa;

namespace {

// A block tree given by a parent array; index 0 is genesis.
struct Forest {
    std::vector<int> parent{-1};
    babe::BlockTree tree{babe::make_genesis({})};
    std::vector<Digest> hashes{tree.genesis().hash()};

    int add(int p)
    {
        babe::Block b;
        b.header.parent = hashes[p];
        b.header.number = tree.at(hashes[p]).number() + 1;
        b.header.slot = static_cast<uint64_t>(parent.size());
        b.hash = b.header.hash();
        hashes.push_back(tree.insert(std::make_shared<const babe::Block>(std::move(b))).hash());
        parent.push_back(p);
        return static_cast<int>(parent.size()) - 1;
    }

    bool ancestor(int a, int b) const
    {
        for (; b >= 0; b = parent[b])
            if (a == b)
                return true;
        return false;
    }

    int index(const Digest& h) const
    {
        return static_cast<int>(std::find(hashes.begin(), hashes.end(), h) - hashes.begin());
    }
};

struct Voters {
    crypto::KeyRegistry registry;
    std::vector<crypto::KeyPair> keys;
    VoterSet set;

    explicit Voters(size_t n, std::vector<uint64_t> weights = {})
    {
        std::vector<crypto::PublicKey> pubs;
        for (size_t i = 0; i < n; ++i) {
            keys.push_back(registry.generate("voter-" + std::to_string(i)));
            pubs.push_back(keys.back().public_key);
        }
        set = VoterSet::equal(pubs);
        if (!weights.empty())
            set.weights = std::move(weights);
    }

    SignedVote vote(VoterId v, uint64_t round, Stage s, const Forest& f, int block) const
    {
        return sign_vote(round, s, f.hashes[block], f.tree.at(f.hashes[block]).number(), v, keys[v].secret);
    }
};

bool sm(uint64_t w, uint64_t total)
{
    return 3 * w > 2 * total;
}

// Oracle vote model: per voter, the set of blocks it voted for (two or more = equivocator).
using Ballots = std::map<VoterId, std::vector<int>>;

uint64_t oracle_weight(const Forest& f, const Ballots& ballots, const VoterSet& vs, int b)
{
    uint64_t w = 0;
    for (const auto& [id, blocks] : ballots) {
        bool eq = blocks.size() > 1;
        if (eq || f.ancestor(b, blocks[0]))
            w += vs.weights[id];
    }
    return w;
}

// Enumerate every block; keep the deepest whose whole path from genesis is a
// chain of unique supermajority children.
std::optional<int> oracle_ghost(const Forest& f, const Ballots& ballots, const VoterSet& vs)
{
    auto total = vs.total();
    auto qualifies = [&](int b) { return sm(oracle_weight(f, ballots, vs, b), total); };
    if (!qualifies(0))
        return std::nullopt;
    int best = 0;
    for (int b = 1; b < static_cast<int>(f.parent.size()); ++b) {
        bool ok = true;
        for (int x = b; x != 0 && ok; x = f.parent[x]) {
            int siblings = 0;
            for (int c = 1; c < static_cast<int>(f.parent.size()); ++c)
                if (f.parent[c] == f.parent[x] && qualifies(c))
                    ++siblings;
            ok = qualifies(x) && siblings == 1;
        }
        auto depth = [&](int x) {
            int d = 0;
            for (; x != 0; x = f.parent[x])
                ++d;
            return d;
        };
        if (ok && depth(b) > depth(best))
            best = b;
    }
    return best;
}

// Could `b` still gain a precommit supermajority under some completion of the
// missing votes? Exhaustive over every block choice of each silent voter.
bool oracle_possible(const Forest& f, const Ballots& pc, const VoterSet& vs, int b)
{
    std::vector<VoterId> silent;
    for (VoterId v = 0; v < vs.size(); ++v)
        if (!pc.contains(v))
            silent.push_back(v);
    int blocks = static_cast<int>(f.parent.size());
    std::vector<int> choice(silent.size(), 0);
    for (;;) {
        auto full = pc;
        for (size_t i = 0; i < silent.size(); ++i)
            full[silent[i]] = {choice[i]};
        if (sm(oracle_weight(f, full, vs, b), vs.total()))
            return true;
        size_t i = 0;
        while (i < choice.size() && ++choice[i] == blocks)
            choice[i++] = 0;
        if (i == choice.size())
            return false;
    }
}

VoteSet to_set(const Voters& v, const Forest& f, const Ballots& ballots, uint64_t round, Stage s)
{
    VoteSet set(round, s, v.set);
    for (const auto& [id, blocks] : ballots)
        for (int b : blocks)
            set.add(v.vote(id, round, s, f, b));
    return set;
}

} // namespace

TEST(Ghost, FigureFourVotes)
{
    Forest f;
    int x = f.add(0);
    int y = f.add(x), z = f.add(x);
    int y2 = f.add(y);
    Voters v(10);
    VoteSet set(1, Stage::prevote, v.set);
    for (VoterId i = 0; i < 10; ++i)
        set.add(v.vote(i, 1, Stage::prevote, f, i < 4 ? y2 : (i < 6 ? y : z)));
    EXPECT_EQ(descendant_weight(set, f.tree, f.hashes[x]), 10u);
    EXPECT_EQ(descendant_weight(set, f.tree, f.hashes[y]), 6u);
    EXPECT_EQ(ghost_2_3(set, f.tree, f.hashes[0]), f.hashes[x]);
}

TEST(Ghost, SingleChainAndEmpty)
{
    Forest f;
    int head = f.add(f.add(f.add(0)));
    Voters v(4);
    VoteSet set(1, Stage::prevote, v.set);
    EXPECT_EQ(ghost(set, f.tree, f.hashes[0]), std::nullopt);
    EXPECT_EQ(ghost_2_3(set, f.tree, f.hashes[0]), f.hashes[0]);
    for (VoterId i = 0; i < 4; ++i)
        set.add(v.vote(i, 1, Stage::prevote, f, head));
    EXPECT_EQ(ghost(set, f.tree, f.hashes[0]), f.hashes[head]);
}

TEST(Ghost, MatchesBruteForceOnRandomVoteSets)
{
    std::mt19937_64 rng(11);
    int checked_eq = 0;
    for (int trial = 0; trial < 600; ++trial) {
        Forest f;
        int blocks = 2 + static_cast<int>(rng() % 11);
        for (int i = 1; i < blocks; ++i)
            f.add(static_cast<int>(rng() % i));
        size_t n = 1 + rng() % 7;
        std::vector<uint64_t> w;
        for (size_t i = 0; i < n; ++i)
            w.push_back(1 + rng() % 5);
        Voters v(n, w);
        Ballots ballots;
        for (VoterId id = 0; id < n; ++id) {
            if (rng() % 6 == 0)
                continue;
            ballots[id] = {static_cast<int>(rng() % blocks)};
            if (rng() % 8 == 0) {
                int other = static_cast<int>(rng() % blocks);
                if (other != ballots[id][0]) {
                    ballots[id].push_back(other);
                    ++checked_eq;
                }
            }
        }
        auto set = to_set(v, f, ballots, 1, Stage::prevote);
        auto expect = oracle_ghost(f, ballots, v.set);
        auto got = ghost(set, f.tree, f.hashes[0]);
        ASSERT_EQ(got.has_value(), expect.has_value()) << trial;
        if (got)
            ASSERT_EQ(f.index(*got), *expect) << trial;
    }
    EXPECT_GT(checked_eq, 10);
}

TEST(Estimate, TrivialCases)
{
    Forest f;
    int b = f.add(f.add(0));
    int side = f.add(0);
    Voters v(4);
    Ballots all_b{{0, {b}}, {1, {b}}, {2, {b}}, {3, {b}}};
    auto pv = to_set(v, f, all_b, 1, Stage::prevote);
    auto pc = to_set(v, f, all_b, 1, Stage::precommit);
    auto view = round_view(pv, pc, f.tree, f.hashes[0]);
    EXPECT_EQ(view.estimate, f.hashes[b]);
    EXPECT_TRUE(view.completable);
    EXPECT_EQ(view.precommit_ghost, f.hashes[b]);

    VoteSet none(1, Stage::precommit, v.set);
    view = round_view(pv, none, f.tree, f.hashes[0]);
    EXPECT_EQ(view.estimate, f.hashes[b]);
    EXPECT_FALSE(view.completable);

    // two precommits on a conflicting block rule out everything below genesis
    Ballots split{{0, {side}}, {1, {side}}, {2, {b}}};
    view = round_view(pv, to_set(v, f, split, 1, Stage::precommit), f.tree, f.hashes[0]);
    EXPECT_EQ(view.estimate, f.hashes[0]);
    EXPECT_TRUE(view.completable);
    Ballots two{{0, {side}}, {2, {b}}};
    view = round_view(pv, to_set(v, f, two, 1, Stage::precommit), f.tree, f.hashes[0]);
    EXPECT_FALSE(view.completable);
}

TEST(Estimate, MatchesBruteForceCompletions)
{
    std::mt19937_64 rng(29);
    int completable = 0;
    for (int trial = 0; trial < 400; ++trial) {
        Forest f;
        int blocks = 2 + static_cast<int>(rng() % 8);
        for (int i = 1; i < blocks; ++i)
            f.add(static_cast<int>(rng() % i));
        size_t n = 4 + rng() % 4;
        Voters v(n);
        // prevotes mostly agree so that g(prevotes) exists
        Ballots pv_b, pc_b;
        int favourite = static_cast<int>(rng() % blocks);
        for (VoterId id = 0; id < n; ++id)
            pv_b[id] = {rng() % 4 == 0 ? static_cast<int>(rng() % blocks) : favourite};
        size_t silent = rng() % 4;
        for (VoterId id = 0; id + silent < n; ++id) {
            pc_b[id] = {rng() % 3 == 0 ? static_cast<int>(rng() % blocks) : favourite};
            if (rng() % 10 == 0)
                pc_b[id].push_back(static_cast<int>(rng() % blocks));
            if (pc_b[id].size() == 2 && pc_b[id][0] == pc_b[id][1])
                pc_b[id].pop_back();
        }
        auto pv = to_set(v, f, pv_b, 1, Stage::prevote);
        auto pc = to_set(v, f, pc_b, 1, Stage::precommit);
        auto view = round_view(pv, pc, f.tree, f.hashes[0]);
        auto g = oracle_ghost(f, pv_b, v.set);
        ASSERT_EQ(view.prevote_ghost.has_value(), g.has_value());
        if (!g)
            continue;
        int e = *g;
        while (e != 0 && !oracle_possible(f, pc_b, v.set, e))
            e = f.parent[e];
        ASSERT_EQ(f.index(view.estimate), e) << trial;
        bool expect_complete = oracle_ghost(f, pc_b, v.set).has_value();
        if (expect_complete && e == *g)
            for (int c = 1; c < blocks; ++c)
                if (f.parent[c] == *g && oracle_possible(f, pc_b, v.set, c))
                    expect_complete = false;
        ASSERT_EQ(view.completable, expect_complete) << trial;
        completable += expect_complete ? 1 : 0;
    }
    EXPECT_GT(completable, 20);
}

TEST(Votes, DuplicatesAndEquivocation)
{
    Forest f;
    int a = f.add(0), b = f.add(0), c = f.add(0);
    Voters v(4);
    VoteSet set(3, Stage::prevote, v.set);
    std::optional<EquivocationReport> report;
    EXPECT_EQ(set.add(v.vote(1, 3, Stage::prevote, f, a), &report), VoteSet::Added::counted);
    EXPECT_EQ(set.add(v.vote(1, 3, Stage::prevote, f, a), &report), VoteSet::Added::duplicate);
    EXPECT_FALSE(report);
    EXPECT_EQ(set.add(v.vote(1, 3, Stage::prevote, f, b), &report), VoteSet::Added::equivocation);
    ASSERT_TRUE(report);
    EXPECT_EQ(report->first.block, f.hashes[a]);
    EXPECT_EQ(report->second.block, f.hashes[b]);
    report.reset();
    EXPECT_EQ(set.add(v.vote(1, 3, Stage::prevote, f, c), &report), VoteSet::Added::ignored);
    EXPECT_FALSE(report);
    EXPECT_EQ(set.add(v.vote(2, 4, Stage::prevote, f, a)), VoteSet::Added::ignored);
    EXPECT_EQ(set.add(v.vote(2, 3, Stage::precommit, f, a)), VoteSet::Added::ignored);
    // the equivocator supports every branch
    EXPECT_EQ(descendant_weight(set, f.tree, f.hashes[c]), 1u);
}

TEST(Primary, Rotation)
{
    Voters v(5);
    std::set<VoterId> seen;
    for (uint64_t r = 0; r < 5; ++r) {
        seen.insert(v.set.primary_for_round(r));
        EXPECT_EQ(v.set.primary_for_round(r), v.set.primary_for_round(r + 5));
    }
    EXPECT_EQ(seen.size(), 5u);
    Voters one(1);
    for (uint64_t r = 0; r < 9; ++r)
        EXPECT_EQ(one.set.primary_for_round(r), 0u);
    EXPECT_THROW((void)VoterSet{}.primary_for_round(0), Error);
}

TEST(Justifications, ReplayJsonAndAudit)
{
    Forest f;
    int left = f.add(f.add(0));
    int right = f.add(0);
    Voters v(4);
    Ballots unanimous{{0, {left}}, {1, {left}}, {2, {left}}, {3, {left}}};
    auto pc = to_set(v, f, unanimous, 2, Stage::precommit);
    Justification j{2, f.hashes[left], 2, pc.all_votes()};
    EXPECT_TRUE(verify_justification(j, v.set, v.registry, f.tree));
    auto back = Justification::from_json(j.to_json());
    EXPECT_EQ(back.to_json(), j.to_json());
    EXPECT_TRUE(verify_justification(back, v.set, v.registry, f.tree));
    EXPECT_THROW((void)Justification::from_json("{\"round\": 1}"), Error);

    auto forged = j;
    forged.precommits[0].block = f.hashes[right];
    EXPECT_FALSE(verify_justification(forged, v.set, v.registry, f.tree));
    auto thin = j;
    thin.precommits.resize(2);
    EXPECT_FALSE(verify_justification(thin, v.set, v.registry, f.tree));

    // 60/40 across siblings finalizes nothing
    Forest g;
    int s1 = g.add(0), s2 = g.add(0);
    Voters ten(10);
    Ballots split;
    for (VoterId i = 0; i < 10; ++i)
        split[i] = {i < 6 ? s1 : s2};
    auto split_set = to_set(ten, g, split, 1, Stage::precommit);
    EXPECT_EQ(ghost_2_3(split_set, g.tree, g.hashes[0]), g.hashes[0]);

    // voters 2 and 3 sign both sides of one round
    Ballots a{{0, {left}}, {2, {left}}, {3, {left}}};
    Ballots b{{1, {right}}, {2, {right}}, {3, {right}}};
    Justification ja{5, f.hashes[left], 2, to_set(v, f, a, 5, Stage::precommit).all_votes()};
    Justification jb{5, f.hashes[right], 1, to_set(v, f, b, 5, Stage::precommit).all_votes()};
    EXPECT_TRUE(verify_justification(ja, v.set, v.registry, f.tree));
    EXPECT_TRUE(verify_justification(jb, v.set, v.registry, f.tree));
    auto r = audit(ja, jb, v.set);
    EXPECT_TRUE(r.same_round);
    EXPECT_EQ(r.culprits, (std::set<VoterId>{2, 3}));
    EXPECT_GE(3 * r.weight, v.set.total());
}

namespace {

// Voters on a shared block tree exchanging messages with a fixed delay.
struct Net {
    Forest f;
    Voters v;
    std::vector<std::unique_ptr<babe::BlockTree>> trees;
    std::vector<std::unique_ptr<Voter>> nodes;
    std::deque<std::tuple<uint64_t, size_t, Message>> queue;
    std::vector<EquivocationReport> reports;
    std::vector<SafetyAlarm> alarms;
    uint64_t now = 0;
    uint64_t delay = 2;

    explicit Net(size_t n) : v(n) {}

    void chain(int length)
    {
        int tip = 0;
        for (int i = 0; i < length; ++i)
            tip = f.add(tip);
    }

    void boot()
    {
        for (size_t i = 0; i < v.set.size(); ++i) {
            trees.push_back(std::make_unique<babe::BlockTree>(babe::make_genesis({})));
            for (size_t b = 1; b < f.hashes.size(); ++b)
                trees.back()->insert(f.tree.at(f.hashes[b]).block);
            nodes.push_back(std::make_unique<Voter>(static_cast<VoterId>(i), &v.keys[i], v.set, v.registry,
                                                    *trees.back(), VoterConfig{5}));
        }
        for (size_t i = 0; i < nodes.size(); ++i) {
            Outbox out;
            nodes[i]->start(now, out);
            send(i, out);
        }
    }

    void send(size_t from, Outbox& out)
    {
        for (auto& m : out.broadcast)
            for (size_t to = 0; to < nodes.size(); ++to)
                if (to != from)
                    queue.emplace_back(now + delay, to, m);
        reports.insert(reports.end(), out.reports.begin(), out.reports.end());
        alarms.insert(alarms.end(), out.alarms.begin(), out.alarms.end());
    }

    void run(uint64_t until)
    {
        for (; now < until; ++now) {
            while (!queue.empty() && std::get<0>(queue.front()) <= now) {
                auto [_, to, m] = queue.front();
                queue.pop_front();
                Outbox out;
                nodes[to]->on_message(m, now, out);
                send(to, out);
            }
            for (size_t i = 0; i < nodes.size(); ++i) {
                Outbox out;
                nodes[i]->on_tick(now, out);
                send(i, out);
            }
        }
    }
};

} // namespace

TEST(VoterNet, HonestNodesFinalizeTheChain)
{
    Net net(4);
    net.chain(6);
    net.boot();
    net.run(200);
    for (const auto& t : net.trees)
        EXPECT_EQ(t->last_finalized(), net.f.hashes.back());
    for (const auto& n : net.nodes) {
        EXPECT_FALSE(n->alarmed());
        EXPECT_GT(n->round(), 2u);
    }
    EXPECT_TRUE(net.alarms.empty());

    // a fresh observer accepts the same finality from the justification alone
    babe::BlockTree fresh(babe::make_genesis({}));
    for (size_t b = 1; b < net.f.hashes.size(); ++b)
        fresh.insert(net.f.tree.at(net.f.hashes[b]).block);
    Voter observer(std::nullopt, nullptr, net.v.set, net.v.registry, fresh, VoterConfig{5});
    Outbox out;
    observer.start(0, out);
    observer.on_message(Commit{net.nodes[0]->log().back().justification}, 1, out);
    EXPECT_EQ(fresh.last_finalized(), net.f.hashes.back());
    ASSERT_EQ(out.finalized.size(), 1u);
    EXPECT_EQ(out.finalized[0].block, net.f.hashes.back());
}

TEST(VoterNet, VoteFiltering)
{
    Net net(4);
    net.chain(3);
    int side = net.f.add(0);
    net.boot();
    net.run(200);
    auto& node = *net.nodes[0];
    auto r = node.round();
    auto fin = net.f.index(net.trees[0]->last_finalized());
    ASSERT_TRUE(fin == 3 || fin == side);
    int conflicting = fin == side ? 3 : side;

    // conflicting with finality: dropped
    Outbox out;
    node.on_message(net.v.vote(1, r, Stage::prevote, net.f, conflicting), net.now, out);
    EXPECT_FALSE(node.votes(r, Stage::prevote)->has_voted(1) &&
                 node.votes(r, Stage::prevote)->votes().at(1).block == net.f.hashes[conflicting]);
    // outside the voter set: dropped
    Voters strangers(6);
    auto alien = strangers.vote(5, r, Stage::prevote, net.f, fin);
    node.on_message(alien, net.now, out);
    EXPECT_FALSE(node.votes(r, Stage::prevote)->has_voted(5));
    EXPECT_EQ(node.pending(), 0u);

    // unknown block: buffered until imported
    babe::Block b;
    b.header.parent = net.f.hashes[fin];
    b.header.number = net.trees[0]->at(b.header.parent).number() + 1;
    b.header.slot = 99;
    b.hash = b.header.hash();
    auto blk = std::make_shared<const babe::Block>(b);
    auto future = sign_vote(r, Stage::prevote, b.hash, b.header.number, 2, net.v.keys[2].secret);
    node.on_message(future, net.now, out);
    EXPECT_EQ(node.pending(), 1u);
    net.trees[0]->insert(blk);
    node.on_block_imported(net.now, out);
    EXPECT_EQ(node.pending(), 0u);
}

TEST(VoterNet, SilentThirdStallsFinality)
{
    Net net(3);
    net.chain(4);
    net.v.set.weights = {1, 1, 1};
    // only two of three voters run; 2/3 is not a strict supermajority
    net.nodes.clear();
    net.boot();
    net.nodes.pop_back();
    net.run(200);
    EXPECT_EQ(net.trees[0]->last_finalized(), net.f.hashes[0]);
}
