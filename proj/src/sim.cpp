// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sim_audit.hpp"

#include <relaylab/grandpa.hpp>
#include <relaylab/npos.hpp>

#include <json.hpp>
#include <sodium.h>

#include <algorithm>
#include <queue>
#include <random>
#include <unordered_map>
#include <unordered_set>
#include <variant>

namespace relaylab::sim {

std::map<xcmp::ParaId, std::vector<uint32_t>> rotate_assignments(uint64_t era, uint32_t validators,
                                                                 uint32_t parachains, const Digest& randomness)
{
    std::map<xcmp::ParaId, std::vector<uint32_t>> out;
    if (parachains == 0)
        return out;
    if (validators < parachains)
        throw Error(ErrorKind::config, "fewer validators than parachains");
    std::vector<uint32_t> order(validators);
    for (uint32_t i = 0; i < validators; ++i)
        order[i] = i;
    auto era_bytes = ByteWriter().u64(era).bytes();
    for (uint32_t i = validators; i-- > 1;) {
        auto d = hash({as_view("rotation"), randomness.view(), era_bytes, ByteWriter().u64(i).bytes()});
        auto j = ByteReader(d.view()).u64() % (i + 1);
        std::swap(order[i], order[j]);
    }
    uint32_t base = validators / parachains, extra = validators % parachains, at = 0;
    for (uint32_t p = 0; p < parachains; ++p) {
        uint32_t size = base + (p < extra ? 1 : 0);
        std::vector<uint32_t> group(order.begin() + at, order.begin() + at + size);
        std::sort(group.begin(), group.end());
        out[p] = std::move(group);
        at += size;
    }
    return out;
}

namespace {

using babe::BlockPtr;
using babe::TreeEntry;
using xcmp::ParaId;

constexpr uint32_t harness = UINT32_MAX;
constexpr uint32_t client = UINT32_MAX - 1;
constexpr runtime::AccountId governance_account = 0;
constexpr runtime::AccountId validator_account_base = 1000;

std::optional<int64_t> claimed_time(const babe::Block& b)
{
    const auto& xs = b.body.extrinsics;
    if (xs.empty() || xs[0].call != runtime::Call::timestamp)
        return std::nullopt;
    try {
        return static_cast<int64_t>(std::min<uint64_t>(runtime::timestamp_of(xs[0]), INT64_MAX / 2));
    } catch (const Error&) {
        return std::nullopt;
    }
}

class Rng {
public:
    Rng(uint64_t seed, std::string_view label)
    {
        auto d = hash({ByteWriter().u64(seed).bytes(), as_view(label)});
        gen_.seed(ByteReader(d.view()).u64());
    }
    uint64_t next() { return gen_(); }
    uint64_t below(uint64_t n) { return n <= 1 ? 0 : gen_() % n; }
    bool chance(Ratio r) { return r.num >= r.den || below(r.den) < r.num; }

private:
    std::mt19937_64 gen_;
};

// local = offset + t + floor(t * drift / 10^6)
struct Clock {
    int64_t offset = 0;
    int64_t drift_ppm = 0;

    int64_t local(uint64_t t) const
    {
        __int128 skew = static_cast<__int128>(t) * drift_ppm;
        __int128 q = skew / 1'000'000;
        if (skew % 1'000'000 != 0 && skew < 0)
            --q;
        return offset + static_cast<int64_t>(t) + static_cast<int64_t>(q);
    }
    // first global tick at which the local reading reaches `l`
    uint64_t global(int64_t l) const
    {
        __int128 guess = static_cast<__int128>(l - offset) * 1'000'000 / (1'000'000 + drift_ppm);
        uint64_t t = guess < 0 ? 0 : static_cast<uint64_t>(guess);
        while (local(t) < l)
            ++t;
        while (t > 0 && local(t - 1) >= l)
            --t;
        return t;
    }
};

// candidate data shared by statements; the receipt carries no attestations
struct CandidateInfo {
    para::CandidateReceipt receipt;
    Digest hash;
    xcmp::IncludedHeader header;
    uint64_t relay_parent_slot = 0;
};
using InfoPtr = std::shared_ptr<const CandidateInfo>;
using PiecePtr = std::shared_ptr<const erasure::Piece>;

struct SlotTimer {
    uint64_t slot = 0;
    bool secondary = false;
};
struct VoterTimer {};
struct StallEnd {};
struct BlockMsg {
    BlockPtr block;
};
struct BlockRequest {
    Digest hash;
};
struct TxMsg {
    std::shared_ptr<const runtime::Extrinsic> tx;
};
struct VoteMsg {
    std::shared_ptr<const grandpa::Message> msg;
};
struct CollationMsg {
    std::shared_ptr<const para::PovBlock> pov;
    Digest relay_parent;
};
struct StatementMsg {
    InfoPtr info;
    uint32_t validator = 0;
    crypto::Signature sig;
};
struct PieceMsg {
    Digest candidate;
    PiecePtr piece;
    bool response = false;
};
struct PieceRequest {
    Digest candidate;
};
struct AvailabilityMsg {
    Digest candidate;
    uint32_t validator = 0;
};
struct VerdictMsg {
    Digest candidate;
    uint32_t validator = 0;
    bool valid = true;
};
struct ReportMsg {
    Digest candidate;
    std::string reporter;
};
struct CandidateTimer {
    enum Kind { unavailability, fisherman } kind = unavailability;
    Digest candidate;
    Digest block;
};
struct GlobalEvent {
    enum Kind { era_end, workload, referendum, sample } kind = sample;
    uint64_t arg = 0;
};

using Payload = std::variant<SlotTimer, VoterTimer, StallEnd, BlockMsg, BlockRequest, TxMsg, VoteMsg, CollationMsg,
                             StatementMsg, PieceMsg, PieceRequest, AvailabilityMsg, VerdictMsg, ReportMsg,
                             CandidateTimer, GlobalEvent>;

const char* kind_name(const Payload& p)
{
    static constexpr const char* names[] = {"slot",      "voter-timer",  "stall-end", "block",     "block-request",
                                            "tx",        "vote",         "collation", "statement", "piece",
                                            "piece-req", "availability", "verdict",   "report",    "candidate-timer",
                                            "global"};
    return names[p.index()];
}

struct Event {
    uint64_t at = 0;
    uint64_t seq = 0;
    uint32_t to = harness;
    uint32_t from = harness;
    bool network = false;
    uint64_t sent_at = 0;
    Payload payload;
};

struct Later {
    bool operator()(const Event& a, const Event& b) const { return a.at != b.at ? a.at > b.at : a.seq > b.seq; }
};

enum class Role { validator, collator, fisherman };

struct Cand {
    InfoPtr info;
    std::map<uint32_t, crypto::Signature> attest;
    PiecePtr piece;
    std::set<uint32_t> avail;
    std::optional<uint64_t> available_at;
    std::vector<Digest> blocks;
    std::optional<bool> my_verdict;
    bool verdict_sent = false;
    bool avail_voted = false;
    bool fetching = false;
    bool fetch_done = false;
    std::map<uint32_t, PiecePtr> fetched;
    std::map<uint32_t, bool> verdicts;
    bool invalid_seen = false;
    std::optional<bool> outcome_invalid;
    size_t invalid_reports = 0;
    bool fisher_scheduled = false;
    std::string reporter;
};

struct Node {
    uint32_t id = 0;
    Role role = Role::validator;
    uint32_t validator = 0; // validator index for validators
    ParaId para = 0;        // for collators
    bool honest = true;
    std::set<Script> scripts;
    uint32_t partition = 0;
    std::string name;

    Clock clock;
    int64_t anchor_local = 0;
    uint64_t anchor_slot = 0;

    std::unique_ptr<babe::BlockTree> tree;
    std::unordered_map<Digest, trie::StateTrie> states;
    std::unordered_map<Digest, int64_t> arrival;
    std::unordered_map<Digest, std::vector<BlockPtr>> orphans;
    std::unordered_set<Digest> requested;
    std::unordered_set<uint64_t> slots_seen;
    std::unordered_map<Digest, std::vector<Digest>> block_cands;
    Digest last_best;

    runtime::TransactionQueue queue;

    std::unique_ptr<grandpa::Voter> voter;
    std::set<uint64_t> voter_timers;
    std::vector<grandpa::Message> stashed; // withheld finality messages
    Digest synced_to;
    std::unique_ptr<babe::SyncEpochTracker> sync;
    std::vector<babe::Arrival> sync_arrivals;

    std::unordered_map<Digest, Cand> cands;
    std::unordered_map<Digest, std::vector<Digest>> cands_by_parent;
    std::unordered_set<Digest> rejected_povs;
    std::vector<CollationMsg> waiting_collations;
    std::unordered_set<Digest> collated_on;
    uint64_t collations = 0;

    bool has(Script s) const { return !honest && scripts.contains(s); }
    int64_t slot_start_local(uint64_t s) const
    {
        return anchor_local + (static_cast<int64_t>(s) - static_cast<int64_t>(anchor_slot)) * slot_ticks;
    }
    int64_t slot_ticks = 0;
};

struct Truth {
    bool valid = true;
    bool honest_checker = false;
    std::vector<uint32_t> attesters;
    ParaId para = 0;
    size_t group_size = 0;
    bool slashed = false;
    bool counted_unavailable = false;
};

struct StvfOutcome {
    bool valid = false;
    Bytes head;
    xcmp::Outgoing outgoing;
};

class Engine {
public:
    Engine(const ScenarioConfig& cfg, const TraceSink& trace);
    MetricsReport run();

private:
    // setup
    void setup_stake();
    void setup_nodes();
    void seed_events();

    // queue
    void push(Event e);
    void send(uint32_t from, uint32_t to, Payload p);
    void broadcast_validators(const Node& from, const Payload& p, bool include_self = false);
    void broadcast_all(const Node& from, const Payload& p);
    void timer(uint32_t node, uint64_t at, Payload p);
    void dispatch(Event& e);
    void trace_event(const Event& e);

    // relay chain
    void on_slot(Node& n, const SlotTimer& t);
    void produce(Node& n, const TreeEntry& parent, uint64_t slot, babe::Claim claim, const crypto::VrfOutput& vrf);
    void import_block(Node& n, BlockPtr b, uint32_t from);
    std::optional<trie::StateTrie> execute(const babe::Block& b, const trie::StateTrie& parent_state);
    bool willing(const Node& n, const babe::Block& b, const TreeEntry& parent);
    void after_change(Node& n);
    void on_tx(Node& n, const TxMsg& m);
    void request_vote_blocks(Node& n, uint32_t from, const grandpa::Message& m);

    // finality
    void voter_poke(Node& n, const std::function<void(grandpa::Outbox&)>& f);
    void flush(Node& n, grandpa::Outbox& out);
    void on_finalized(Node& n, const grandpa::FinalizedEntry& f);
    bool votable(const Node& n, const TreeEntry& e) const;
    bool approved(const Node& n, const Digest& c) const;

    // parachains
    const std::vector<uint32_t>& group_of(uint64_t era, ParaId p);
    uint64_t era_of_slot(uint64_t slot) const { return slot == 0 ? 0 : (slot - 1) / cfg_.economics.slots_per_era; }
    bool in_group(uint64_t era, ParaId p, uint32_t v) { auto& g = group_of(era, p); return std::binary_search(g.begin(), g.end(), v); }
    Bytes para_head(const trie::StateTrie& s, ParaId p) const;
    const xcmp::ForkView& fork_to(const Node& n, const Digest& block);
    void collate(Node& n, const TreeEntry& relay_parent);
    void on_collation(Node& n, const CollationMsg& m);
    StvfOutcome check_pov(const para::PovBlock& pov, const Node& n, const TreeEntry& relay_parent);
    const erasure::ErasurePieces& pieces_of(const para::PovBlock& pov);
    void on_statement(Node& n, const StatementMsg& m);
    void add_info(Node& n, Cand& c, const InfoPtr& info);
    void on_piece(Node& n, const PieceMsg& m);
    void on_piece_request(Node& n, uint32_t from, const PieceRequest& m);
    void on_availability(Node& n, const AvailabilityMsg& m);
    void on_verdict(Node& n, const VerdictMsg& m);
    void on_report(Node& n, const ReportMsg& m);
    void on_candidate_timer(Node& n, const CandidateTimer& t);
    void included(Node& n, const babe::Block& b);
    void maybe_vote_available(Node& n, const Digest& ch, Cand& c);
    void on_available(Node& n, const Digest& ch, Cand& c);
    void check_available(Node& n, const Digest& ch, Cand& c);
    void start_fetch(Node& n, const Digest& ch, Cand& c);
    void finish_fetch(Node& n, const Digest& ch, Cand& c);
    void send_verdict(Node& n, const Digest& ch, Cand& c, bool valid);
    void join_dispute(Node& n, const Digest& ch, Cand& c);
    void conclude_invalid(Node& n, const Digest& ch, Cand& c);
    std::vector<std::pair<para::CandidateReceipt, xcmp::IncludedHeader>> pick_candidates(Node& n,
                                                                                          const TreeEntry& parent);

    // harness
    void on_global(const GlobalEvent& g);
    void era_end(uint64_t era);
    void workload(uint64_t slot);
    void referendum(uint64_t index);
    void sample();
    void slash(const std::string& offender, Ratio fraction, const std::string& reason, const std::string& reporter);
    void slash_invalid(const Digest& candidate, const std::string& reporter);
    uint64_t supply() const;
    void finish(MetricsReport& r);

    const ScenarioConfig& cfg_;
    const TraceSink& trace_;
    uint32_t nval_ = 0;
    uint64_t now_ = 0;
    uint64_t end_ = 0;
    uint64_t seq_ = 0;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    crypto_generichash_state trace_state_{};

    Rng net_rng_, work_rng_, setup_rng_;
    crypto::KeyRegistry registry_;
    std::vector<crypto::KeyPair> vkeys_;
    std::vector<crypto::PublicKey> vpubs_;
    std::vector<std::string> vnames_;
    std::vector<bool> vhonest_;
    grandpa::VoterSet voter_set_;
    babe::EpochParams epoch_;
    std::unique_ptr<runtime::Runtime> runtime_;
    std::vector<para::StvfKind> kinds_;
    std::map<std::string, uint64_t> ledger_genesis_{{"alice", 1'000'000}, {"bob", 1'000'000}};
    Digest rotation_randomness_;

    std::vector<std::unique_ptr<Node>> nodes_;
    std::vector<uint32_t> validator_nodes_;
    std::vector<std::vector<uint32_t>> personas_; // validator index -> node ids
    std::vector<uint32_t> fishermen_;

    // pure memo tables shared by every node
    std::unordered_map<Digest, std::optional<trie::StateTrie>> exec_memo_;
    std::unordered_map<Digest, erasure::ErasurePieces> erasure_memo_;
    std::map<std::pair<Digest, Digest>, StvfOutcome> stvf_memo_;
    std::unordered_map<Digest, std::shared_ptr<xcmp::ForkView>> fork_memo_;
    std::map<std::pair<uint64_t, ParaId>, std::vector<uint32_t>> groups_;

    // omniscient record, written by the harness only
    std::unique_ptr<babe::BlockTree> all_;
    std::unordered_map<Digest, uint64_t> produced_at_;
    std::map<std::pair<uint32_t, uint64_t>, uint32_t> authored_;
    std::unordered_map<Digest, Truth> truth_;
    std::unordered_map<Digest, uint64_t> first_final_;
    std::unordered_set<Digest> reverted_;
    std::set<std::tuple<uint32_t, uint64_t, int>> equivocations_slashed_;
    std::set<std::tuple<uint32_t, uint64_t, int>> equivocations_seen_; // (voter, round, stage)
    std::set<Digest> disputes_;
    std::vector<std::optional<grandpa::FinalizedEntry>> final_head_; // per node
    std::vector<std::pair<grandpa::Justification, grandpa::Justification>> conflicts_;
    uint64_t conflict_count_ = 0;
    std::map<uint64_t, std::map<uint32_t, uint64_t>> sync_estimates_; // sync epoch -> node -> global tick
    std::unordered_map<Digest, uint64_t> tx_submitted_;               // tx hash -> slot
    std::map<uint32_t, uint64_t> user_nonce_;
    uint64_t gov_nonce_ = 0;
    std::vector<std::pair<std::string, uint64_t>> nominators_;
    std::unordered_set<Digest> points_awarded_;
    uint64_t cp_samples_ = 0, cp_violations_ = 0;
    uint64_t stall_end_ = 0;

    // economics ledger
    std::map<std::string, econ::Support> supports_;
    std::map<std::string, uint64_t> free_;
    uint64_t treasury_ = 0, burned_ = 0, minted_ = 0, staker_rewards_ = 0, supply_year_start_ = 0;
    uint64_t supply_start_ = 0;
    econ::PointsLedger points_;

    MetricsReport report_;
};

Engine::Engine(const ScenarioConfig& cfg, const TraceSink& trace)
    : cfg_(cfg), trace_(trace), nval_(cfg.validators), net_rng_(cfg.seed, "network"), work_rng_(cfg.seed, "workload"),
      setup_rng_(cfg.seed, "setup")
{
    cfg_.validate();
    if (sodium_init() < 0)
        throw Error(ErrorKind::config, "libsodium failed to initialise");
    crypto_generichash_init(&trace_state_, nullptr, 0, 32);
    end_ = (cfg_.slots + 1) * cfg_.slot_ticks;
    epoch_.length = cfg_.epoch_length;
    epoch_.tau = cfg_.leader_rate;
    epoch_.genesis_randomness = hash({as_view("randomness"), ByteWriter().u64(cfg_.seed).bytes()});
    rotation_randomness_ = hash({as_view("rotation-seed"), ByteWriter().u64(cfg_.seed).bytes()});
    kinds_ = cfg_.parachains.kinds;
    kinds_.resize(cfg_.parachains.count, para::StvfKind::counter);
    setup_stake();
    setup_nodes();
    seed_events();
}

// Election of the committee from a seeded nominator population. Adversarial
// candidates are drawn first; the dishonest share of nominator stake backs
// only them.
void Engine::setup_stake()
{
    uint32_t ncand = cfg_.candidates.value_or(cfg_.validators + 2);
    auto cid = [](uint32_t i) {
        std::string s = std::to_string(i);
        return "candidate-" + std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
    };
    std::vector<uint32_t> order(ncand);
    for (uint32_t i = 0; i < ncand; ++i)
        order[i] = i;
    for (uint32_t i = ncand; i-- > 1;)
        std::swap(order[i], order[setup_rng_.below(i + 1)]);
    uint32_t bad_cands = static_cast<uint32_t>((static_cast<uint64_t>(cfg_.adversary.count) * ncand + nval_ - 1) / nval_);
    std::set<std::string> adversarial_cands;
    for (uint32_t i = 0; i < bad_cands && i < ncand; ++i)
        adversarial_cands.insert(cid(order[i]));

    npos::ElectionInstance inst;
    inst.committee_size = nval_;
    for (uint32_t i = 0; i < ncand; ++i) {
        inst.candidates.push_back(cid(i));
        inst.nominators.push_back({cid(i), cfg_.nominators.candidate_self_stake, {cid(i)}});
    }
    const auto& nc = cfg_.nominators;
    std::vector<uint64_t> stakes;
    uint64_t total = 0;
    for (uint32_t i = 0; i < nc.count; ++i) {
        stakes.push_back(nc.stake_min + setup_rng_.below(nc.stake_max - nc.stake_min + 1));
        total += stakes.back();
    }
    uint64_t dishonest_budget = total - Ratio{nc.honest_stake}.apply(total);
    uint64_t dishonest = 0;
    std::vector<std::string> honest_pool, bad_pool;
    for (uint32_t i = 0; i < ncand; ++i)
        (adversarial_cands.contains(cid(i)) ? bad_pool : honest_pool).push_back(cid(i));
    for (uint32_t i = 0; i < nc.count; ++i) {
        bool bad = dishonest < dishonest_budget && !bad_pool.empty();
        if (bad)
            dishonest += stakes[i];
        auto pool = bad ? bad_pool : (honest_pool.empty() ? bad_pool : honest_pool);
        std::vector<std::string> approvals;
        for (uint32_t k = 0; k < nc.approvals && !pool.empty(); ++k) {
            auto j = setup_rng_.below(pool.size());
            approvals.push_back(pool[j]);
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(j));
        }
        auto id = "nominator-" + std::to_string(i);
        inst.nominators.push_back({id, stakes[i], approvals});
        nominators_.emplace_back(id, stakes[i]);
    }
    auto result = npos::elect(inst);

    // committee order fixes the validator indices
    std::vector<std::pair<bool, uint32_t>> adv_rank; // (not designated, shuffled position)
    for (uint32_t v = 0; v < nval_; ++v) {
        const auto& name = result.committee[v];
        vnames_.push_back(name);
        auto kp = registry_.generate(name);
        vkeys_.push_back(kp);
        vpubs_.push_back(kp.public_key);
        adv_rank.emplace_back(!adversarial_cands.contains(name), 0);
    }
    std::vector<uint32_t> idx(nval_);
    for (uint32_t v = 0; v < nval_; ++v)
        idx[v] = v;
    for (uint32_t i = nval_; i-- > 1;)
        std::swap(idx[i], idx[setup_rng_.below(i + 1)]);
    std::stable_sort(idx.begin(), idx.end(), [&](uint32_t a, uint32_t b) { return adv_rank[a].first < adv_rank[b].first; });
    vhonest_.assign(nval_, true);
    for (uint32_t i = 0; i < cfg_.adversary.count; ++i) {
        vhonest_[idx[i]] = false;
        report_.adversaries.push_back(idx[i]);
    }
    std::sort(report_.adversaries.begin(), report_.adversaries.end());
    voter_set_ = grandpa::VoterSet::equal(vpubs_);

    std::map<std::string, uint64_t> used;
    for (const auto& [key, amount] : result.distribution) {
        const auto& [nom, cand] = key;
        auto& s = supports_[cand];
        s.validator = cand;
        if (nom == cand)
            s.own_stake += amount;
        else
            s.nominators[nom] += amount;
        used[nom] += amount;
    }
    for (const auto& name : vnames_)
        supports_[name].validator = name;
    for (const auto& n : inst.nominators)
        if (n.stake > used[n.id])
            free_[n.id] += n.stake - used[n.id];
    points_ = econ::PointsLedger(vnames_);
    supply_start_ = supply_year_start_ = supply();
}

uint64_t Engine::supply() const
{
    uint64_t s = cfg_.economics.other_supply + treasury_;
    for (const auto& [_, sup] : supports_)
        s += sup.total();
    for (const auto& [_, b] : free_)
        s += b;
    return s;
}

void Engine::setup_nodes()
{
    runtime::Genesis g;
    g.governance = governance_account;
    auto gov_keys = registry_.generate("governance");
    g.keys[governance_account] = gov_keys.public_key;
    g.balances[governance_account] = cfg_.workload.user_balance;
    for (uint32_t u = 1; u <= cfg_.workload.users; ++u) {
        auto kp = registry_.generate("user-" + std::to_string(u));
        g.keys[u] = kp.public_key;
        g.balances[u] = cfg_.workload.user_balance;
    }
    runtime_ = std::make_unique<runtime::Runtime>(g, registry_);
    auto genesis_state = runtime_->genesis_state();
    auto genesis = babe::make_genesis(genesis_state.root());
    all_ = std::make_unique<babe::BlockTree>(genesis);
    produced_at_[genesis->hash] = 0;

    bool split = cfg_.adversary.scripts.contains(Script::split_brain);
    Rng clock_rng(cfg_.seed, "clocks");
    auto make = [&](Role role, std::string name, bool honest, uint32_t partition) -> Node& {
        auto n = std::make_unique<Node>();
        n->id = static_cast<uint32_t>(nodes_.size());
        n->role = role;
        n->name = std::move(name);
        n->honest = honest;
        n->partition = partition;
        n->slot_ticks = static_cast<int64_t>(cfg_.slot_ticks);
        if (honest) {
            auto off = cfg_.clock.max_offset;
            auto drift = cfg_.clock.max_drift_ppm;
            n->clock.offset = off ? static_cast<int64_t>(clock_rng.below(2 * off + 1)) - off : 0;
            n->clock.drift_ppm = drift ? static_cast<int64_t>(clock_rng.below(2 * drift + 1)) - drift : 0;
        }
        n->tree = std::make_unique<babe::BlockTree>(genesis);
        n->states.emplace(genesis->hash, genesis_state);
        n->arrival[genesis->hash] = 0;
        n->last_best = genesis->hash;
        n->synced_to = genesis->hash;
        if (cfg_.clock.sync_gap_slots)
            n->sync = std::make_unique<babe::SyncEpochTracker>(cfg_.clock.sync_gap_slots);
        nodes_.push_back(std::move(n));
        return *nodes_.back();
    };

    personas_.resize(nval_);
    uint32_t honest_seen = 0;
    for (uint32_t v = 0; v < nval_; ++v) {
        bool honest = vhonest_[v];
        std::vector<uint32_t> parts;
        if (!split)
            parts = {0};
        else if (honest)
            parts = {honest_seen++ % 2};
        else
            parts = {0, 1};
        for (auto part : parts) {
            auto& n = make(Role::validator, vnames_[v], honest, part);
            n.validator = v;
            if (!honest) {
                n.scripts = cfg_.adversary.scripts;
                if (n.scripts.contains(Script::clock_drift))
                    n.clock.drift_ppm = cfg_.adversary.drift_ppm;
            }
            personas_[v].push_back(n.id);
            validator_nodes_.push_back(n.id);
        }
    }
    for (ParaId p = 0; p < cfg_.parachains.count; ++p) {
        auto& n = make(Role::collator, "collator-" + std::to_string(p), true, 0);
        n.para = p;
    }
    for (uint32_t f = 0; f < cfg_.fishermen.count; ++f) {
        auto& n = make(Role::fisherman, "fisherman-" + std::to_string(f), true, 0);
        fishermen_.push_back(n.id);
    }
    final_head_.resize(nodes_.size());

    if (cfg_.finality) {
        grandpa::VoterConfig vc{cfg_.delta};
        for (auto id : validator_nodes_) {
            auto& n = *nodes_[id];
            Node* np = &n;
            n.voter = std::make_unique<grandpa::Voter>(n.validator, &vkeys_[n.validator], voter_set_, registry_,
                                                       *n.tree, vc,
                                                       [this, np](const TreeEntry& e) { return votable(*np, e); });
        }
    }
    if (cfg_.adversary.scripts.contains(Script::finality_stall))
        stall_end_ = cfg_.adversary.stall_rounds * 4 * cfg_.delta;
}

void Engine::seed_events()
{
    for (auto id : validator_nodes_) {
        auto& n = *nodes_[id];
        timer(id, n.clock.global(n.slot_start_local(1)), SlotTimer{1, false});
        if (n.voter) {
            grandpa::Outbox out;
            n.voter->start(0, out);
            flush(n, out);
        }
        if (stall_end_ && n.has(Script::finality_stall))
            timer(id, stall_end_, StallEnd{});
    }
    const auto T = cfg_.slot_ticks;
    for (uint64_t s = 1; s <= cfg_.slots; ++s) {
        push({s * T + T / 2, 0, harness, harness, false, 0, GlobalEvent{GlobalEvent::workload, s}});
        push({s * T + T - 1, 0, harness, harness, false, 0, GlobalEvent{GlobalEvent::sample, s}});
        if (s % cfg_.economics.slots_per_era == 0)
            push({s * T + T - 1, 0, harness, harness, false, 0, GlobalEvent{GlobalEvent::era_end, s / cfg_.economics.slots_per_era}});
    }
    for (size_t i = 0; i < cfg_.referenda.size(); ++i)
        push({cfg_.referenda[i].slot * T, 0, harness, harness, false, 0, GlobalEvent{GlobalEvent::referendum, i}});
}

// ---------------------------------------------------------------- queue

void Engine::push(Event e)
{
    e.seq = seq_++;
    queue_.push(std::move(e));
}

void Engine::timer(uint32_t node, uint64_t at, Payload p)
{
    push({std::max(at, now_), 0, node, node, false, 0, std::move(p)});
}

void Engine::send(uint32_t from, uint32_t to, Payload p)
{
    const Node* src = from < nodes_.size() ? nodes_[from].get() : nullptr;
    const Node& dst = *nodes_[to];
    if (src && src->partition != dst.partition) {
        ++report_.messages_partitioned;
        return;
    }
    bool maximal = (src && src->has(Script::delay_maximal)) || dst.has(Script::delay_maximal);
    uint64_t delay = maximal ? cfg_.delta : 1 + net_rng_.below(cfg_.delta);
    ++report_.messages_sent;
    push({now_ + delay, 0, to, from, true, now_, std::move(p)});
}

void Engine::broadcast_validators(const Node& from, const Payload& p, bool include_self)
{
    for (auto id : validator_nodes_)
        if (id != from.id || include_self)
            send(from.id, id, p);
}

void Engine::broadcast_all(const Node& from, const Payload& p)
{
    for (const auto& n : nodes_)
        if (n->id != from.id)
            send(from.id, n->id, p);
}

void Engine::trace_event(const Event& e)
{
    Digest id;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, BlockMsg>)
                id = p.block->hash;
            else if constexpr (std::is_same_v<T, BlockRequest>)
                id = p.hash;
            else if constexpr (std::is_same_v<T, TxMsg>)
                id = p.tx->signature.bytes;
            else if constexpr (std::is_same_v<T, VoteMsg>)
                std::visit(
                    [&](const auto& m) {
                        using M = std::decay_t<decltype(m)>;
                        if constexpr (std::is_same_v<M, grandpa::Commit>)
                            id = m.justification.block;
                        else
                            id = m.sig.bytes;
                    },
                    *p.msg);
            else if constexpr (std::is_same_v<T, CollationMsg>)
                id = p.relay_parent;
            else if constexpr (std::is_same_v<T, StatementMsg>)
                id = p.info->hash;
            else if constexpr (std::is_same_v<T, PieceMsg> || std::is_same_v<T, PieceRequest> ||
                               std::is_same_v<T, AvailabilityMsg> || std::is_same_v<T, VerdictMsg> ||
                               std::is_same_v<T, ReportMsg> || std::is_same_v<T, CandidateTimer>)
                id = p.candidate;
        },
        e.payload);
    auto rec = ByteWriter().u64(e.at).u64(e.seq).u32(e.to).u32(e.from).u8(static_cast<uint8_t>(e.payload.index())).raw(id.view()).bytes();
    crypto_generichash_update(&trace_state_, rec.data(), rec.size());
    if (trace_) {
        nlohmann::ordered_json j;
        j["t"] = e.at;
        j["seq"] = e.seq;
        j["to"] = e.to == harness ? -1 : static_cast<int64_t>(e.to);
        j["from"] = e.from == harness ? -1 : e.from == client ? -2 : static_cast<int64_t>(e.from);
        j["kind"] = kind_name(e.payload);
        j["id"] = id.hex().substr(0, 16);
        trace_(j.dump());
    }
}

void Engine::dispatch(Event& e)
{
    if (e.network) {
        ++report_.messages_delivered;
        report_.max_delay = std::max(report_.max_delay, e.at - e.sent_at);
    }
    trace_event(e);
    if (e.to == harness) {
        on_global(std::get<GlobalEvent>(e.payload));
        return;
    }
    Node& n = *nodes_[e.to];
    std::visit(
        [&](auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, SlotTimer>) {
                on_slot(n, p);
            } else if constexpr (std::is_same_v<T, VoterTimer>) {
                n.voter_timers.erase(now_);
                voter_poke(n, [&](grandpa::Outbox& out) { n.voter->on_tick(now_, out); });
            } else if constexpr (std::is_same_v<T, StallEnd>) {
                auto stashed = std::move(n.stashed);
                n.stashed.clear();
                for (auto& m : stashed)
                    broadcast_validators(n, VoteMsg{std::make_shared<const grandpa::Message>(std::move(m))});
            } else if constexpr (std::is_same_v<T, BlockMsg>) {
                import_block(n, p.block, e.from);
            } else if constexpr (std::is_same_v<T, BlockRequest>) {
                if (const auto* b = n.tree->find(p.hash))
                    send(n.id, e.from, BlockMsg{b->block});
            } else if constexpr (std::is_same_v<T, TxMsg>) {
                on_tx(n, p);
            } else if constexpr (std::is_same_v<T, VoteMsg>) {
                request_vote_blocks(n, e.from, *p.msg);
                if (n.voter)
                    voter_poke(n, [&](grandpa::Outbox& out) { n.voter->on_message(*p.msg, now_, out); });
            } else if constexpr (std::is_same_v<T, CollationMsg>) {
                on_collation(n, p);
            } else if constexpr (std::is_same_v<T, StatementMsg>) {
                on_statement(n, p);
            } else if constexpr (std::is_same_v<T, PieceMsg>) {
                on_piece(n, p);
            } else if constexpr (std::is_same_v<T, PieceRequest>) {
                on_piece_request(n, e.from, p);
            } else if constexpr (std::is_same_v<T, AvailabilityMsg>) {
                on_availability(n, p);
            } else if constexpr (std::is_same_v<T, VerdictMsg>) {
                on_verdict(n, p);
            } else if constexpr (std::is_same_v<T, ReportMsg>) {
                on_report(n, p);
            } else if constexpr (std::is_same_v<T, CandidateTimer>) {
                on_candidate_timer(n, p);
            }
        },
        e.payload);
}

// ---------------------------------------------------------------- relay chain

void Engine::on_slot(Node& n, const SlotTimer& t)
{
    if (!t.secondary)
        timer(n.id, n.clock.global(n.slot_start_local(t.slot + 1)), SlotTimer{t.slot + 1, false});
    if (t.slot > cfg_.slots)
        return;
    const auto& parent = n.tree->best_head();
    if (parent.slot() >= t.slot)
        return;
    auto r = n.tree->randomness_for(parent, babe::epoch_of(t.slot, epoch_.length), epoch_);
    const auto& keys = vkeys_[n.validator];
    if (!t.secondary) {
        if (auto vrf = babe::slot_leader_check(keys.secret, r, t.slot, epoch_.tau)) {
            produce(n, parent, t.slot, babe::Claim::primary, *vrf);
        } else if (babe::secondary_leader(r, t.slot, nval_) == n.validator) {
            // a secondary author steps in only when no block for the slot shows up
            timer(n.id, n.clock.global(n.slot_start_local(t.slot) + static_cast<int64_t>(2 * cfg_.delta)),
                  SlotTimer{t.slot, true});
        }
        return;
    }
    if (n.slots_seen.contains(t.slot) || babe::secondary_leader(r, t.slot, nval_) != n.validator)
        return;
    produce(n, parent, t.slot, babe::Claim::secondary, {});
}

void Engine::produce(Node& n, const TreeEntry& parent, uint64_t slot, babe::Claim claim, const crypto::VrfOutput& vrf)
{
    babe::BuildInput in;
    in.author = n.validator;
    in.keys = &vkeys_[n.validator];
    in.slot = slot;
    in.claim = claim;
    in.vrf = vrf;
    in.fee_account = validator_account_base + n.validator;
    in.timestamp = static_cast<uint64_t>(std::max<int64_t>(0, n.slot_start_local(slot)));
    const auto& parent_state = n.states.at(parent.hash());
    if (!n.has(Script::censor)) {
        for (auto& [receipt, header] : pick_candidates(n, parent)) {
            in.candidates.push_back(std::move(receipt));
            in.included.push_back(std::move(header));
        }
        in.transactions = n.queue.select(*runtime_, parent_state);
    }
    std::vector<BlockPtr> blocks;
    auto built = babe::build_block(parent, parent_state, *runtime_, in);
    exec_memo_.emplace(built.block->hash, built.state);
    blocks.push_back(built.block);
    if (n.has(Script::equivocate)) {
        babe::BuildInput twin = in;
        twin.candidates.clear();
        twin.included.clear();
        twin.transactions.clear();
        twin.timestamp += 1;
        auto other = babe::build_block(parent, parent_state, *runtime_, twin);
        exec_memo_.emplace(other.block->hash, other.state);
        blocks.push_back(other.block);
    }
    for (const auto& b : blocks) {
        all_->insert(b);
        produced_at_.emplace(b->hash, now_);
        ++report_.blocks_produced;
        if (claim == babe::Claim::primary)
            ++report_.primary_blocks;
        if (++authored_[{n.validator, slot}] == 2)
            ++report_.block_equivocations;
        if (!cfg_.finality)
            points_.award(vnames_[n.validator], econ::PayableAction::relay_block_produced);
    }
    for (const auto& b : blocks)
        import_block(n, b, n.id);
    if (blocks.size() == 1) {
        broadcast_all(n, BlockMsg{blocks[0]});
    } else {
        // each half of the network sees one of the two blocks first
        for (const auto& other : nodes_)
            if (other->id != n.id)
                send(n.id, other->id, BlockMsg{blocks[other->id % 2]});
    }
}

std::optional<trie::StateTrie> Engine::execute(const babe::Block& b, const trie::StateTrie& parent_state)
{
    auto it = exec_memo_.find(b.hash);
    if (it != exec_memo_.end())
        return it->second;
    std::optional<trie::StateTrie> res;
    try {
        res = runtime_->apply_block(parent_state, b.body, b.header.state_root);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::invalid_block)
            throw;
    }
    exec_memo_.emplace(b.hash, res);
    return res;
}

bool Engine::willing(const Node& n, const babe::Block& b, const TreeEntry& parent)
{
    auto era = era_of_slot(parent.slot() + 1);
    auto candidate_ok = [&](const para::CandidateReceipt& r) {
        if (r.relay_parent != parent.hash() || r.para >= cfg_.parachains.count || r.pieces != nval_)
            return false;
        std::map<uint32_t, crypto::PublicKey> group;
        for (auto v : group_of(era, r.para))
            group[v] = vpubs_[v];
        return para::attestations_valid(r, group, registry_);
    };
    // a timestamp past the slot start is measured against the current reading
    auto local = n.slot_start_local(b.header.slot);
    if (auto ts = claimed_time(b))
        local = std::max(local, std::min(*ts, n.clock.local(now_)));
    if (!runtime::inherent_check(b.body, static_cast<uint64_t>(std::max<int64_t>(0, local)), cfg_.tolerance(),
                                 candidate_ok))
        return false;
    // side data must match the receipts it accompanies
    std::vector<para::CandidateReceipt> receipts;
    for (const auto& e : b.body.extrinsics)
        if (e.call == runtime::Call::candidates)
            receipts = runtime::candidates_of(e);
    const auto& inc = b.relay_entry->included;
    if (inc.size() != receipts.size())
        return false;
    const auto& pstate = n.states.at(parent.hash());
    for (size_t i = 0; i < inc.size(); ++i) {
        const auto& h = inc[i];
        const auto& r = receipts[i];
        if (h.para != r.para || h.para_block != r.pov_hash)
            return false;
        try {
            auto head = para::HeadData::decode(r.head_data);
            auto prev = para::HeadData::decode(para_head(pstate, r.para));
            if (head.message_root != h.commitment.message_root || head.out_heads != h.commitment.heads ||
                h.prev_heads != prev.out_heads)
                return false;
            auto c = xcmp::build_commitment(h.prev_heads, h.outbox);
            if (c.message_root != h.commitment.message_root || c.heads != h.commitment.heads ||
                c.bitfield != h.commitment.bitfield)
                return false;
        } catch (const Error&) {
            return false;
        }
    }
    return true;
}

void Engine::import_block(Node& n, BlockPtr first, uint32_t from)
{
    std::vector<BlockPtr> work{std::move(first)};
    bool any = false;
    while (!work.empty()) {
        auto b = std::move(work.back());
        work.pop_back();
        if (n.tree->contains(b->hash))
            continue;
        n.arrival.try_emplace(b->hash, n.clock.local(now_)); // first receipt, before any hold
        const auto& h = b->header;
        const auto* parent = n.tree->find(h.parent);
        if (!parent) {
            n.orphans[h.parent].push_back(b);
            if (from != n.id && from < nodes_.size() && n.requested.insert(h.parent).second)
                send(n.id, from, BlockRequest{h.parent});
            continue;
        }
        // a block from a slot that has not started here waits for it
        if (auto start = n.slot_start_local(h.slot); start > n.clock.local(now_)) {
            timer(n.id, n.clock.global(start), BlockMsg{b});
            continue;
        }
        // so does one whose timestamp is ahead of the local clock by more than the tolerance
        if (auto ts = claimed_time(*b); ts && *ts > n.clock.local(now_) + static_cast<int64_t>(cfg_.tolerance())) {
            timer(n.id, n.clock.global(*ts - static_cast<int64_t>(cfg_.tolerance())), BlockMsg{b});
            continue;
        }
        if (!babe::validate_header(h, *n.tree, epoch_, vpubs_, registry_))
            continue;
        auto st = execute(*b, n.states.at(h.parent));
        if (!st)
            continue;
        bool ok = willing(n, *b, *parent);
        n.tree->insert(b);
        n.states.emplace(b->hash, std::move(*st));
        n.slots_seen.insert(h.slot);
        if (!ok) {
            n.tree->mark_bad(b->hash);
        }
        included(n, *b);
        any = true;
        if (auto it = n.orphans.find(b->hash); it != n.orphans.end()) {
            for (auto& c : it->second)
                work.push_back(std::move(c));
            n.orphans.erase(it);
        }
    }
    if (any)
        after_change(n);
}

void Engine::after_change(Node& n)
{
    const auto& best = n.tree->best_head();
    if (best.hash() != n.last_best) {
        const auto& old = n.tree->at(n.last_best);
        n.last_best = best.hash();
        const auto& state = n.states.at(best.hash());
        if (n.role == Role::validator && !n.tree->is_ancestor(old.hash(), best.hash())) {
            // transactions of retracted blocks go back to the pool
            for (const auto* e : n.tree->path(n.tree->lca(old, best).hash(), old.hash()))
                for (const auto& ex : e->block->body.extrinsics)
                    if (ex.call != runtime::Call::timestamp && ex.call != runtime::Call::candidates)
                        (void)n.queue.submit(*runtime_, state, ex);
        }
        n.queue.prune(state);
        if (n.role == Role::collator && !n.collated_on.contains(best.hash()))
            collate(n, best);
    }
    if (!n.waiting_collations.empty()) {
        auto waiting = std::move(n.waiting_collations);
        n.waiting_collations.clear();
        for (auto& m : waiting)
            on_collation(n, m);
    }
    if (n.voter)
        voter_poke(n, [&](grandpa::Outbox& out) { n.voter->on_block_imported(now_, out); });
}

void Engine::on_tx(Node& n, const TxMsg& m)
{
    if (n.role != Role::validator)
        return;
    (void)n.queue.submit(*runtime_, n.states.at(n.tree->best_head().hash()), *m.tx);
}

// ---------------------------------------------------------------- finality

// a vote names a block the sender holds; fetch it if it is missing here
void Engine::request_vote_blocks(Node& n, uint32_t from, const grandpa::Message& m)
{
    if (from >= nodes_.size())
        return;
    auto want = [&](const Digest& h) {
        if (!n.tree->contains(h) && n.requested.insert(h).second)
            send(n.id, from, BlockRequest{h});
    };
    std::visit(
        [&](const auto& msg) {
            using M = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<M, grandpa::Commit>) {
                want(msg.justification.block);
                for (const auto& v : msg.justification.precommits)
                    want(v.block);
            } else {
                want(msg.block);
            }
        },
        m);
}

void Engine::voter_poke(Node& n, const std::function<void(grandpa::Outbox&)>& f)
{
    grandpa::Outbox out;
    f(out);
    flush(n, out);
    if (auto d = n.voter->next_deadline(); d && *d > now_ && !n.voter_timers.contains(*d)) {
        n.voter_timers.insert(*d);
        timer(n.id, *d, VoterTimer{});
    }
}

void Engine::flush(Node& n, grandpa::Outbox& out)
{
    for (auto& m : out.broadcast) {
        if (n.has(Script::finality_stall) && now_ < stall_end_) {
            n.stashed.push_back(m);
            continue;
        }
        const auto* vote = std::get_if<grandpa::SignedVote>(&m);
        auto msg = std::make_shared<const grandpa::Message>(m);
        if (vote && n.has(Script::equivocate)) {
            // a second vote, for the parent of the target, to every other node
            const auto* target = n.tree->find(vote->block);
            if (target && target->parent && target->hash() != n.tree->last_finalized()) {
                auto twin = grandpa::sign_vote(vote->round, vote->stage, target->parent->hash(),
                                               target->parent->number(), vote->voter, vkeys_[n.validator].secret);
                auto tmsg = std::make_shared<const grandpa::Message>(twin);
                broadcast_validators(n, VoteMsg{msg});
                for (auto id : validator_nodes_)
                    if (id != n.id && id % 2)
                        send(n.id, id, VoteMsg{tmsg});
                continue;
            }
        }
        broadcast_validators(n, VoteMsg{msg});
    }
    for (const auto& rep : out.reports) {
        auto key = std::make_tuple(rep.first.voter, rep.first.round, static_cast<int>(rep.first.stage));
        if (equivocations_seen_.insert(key).second)
            ++report_.vote_equivocations;
        if (!n.honest)
            continue;
        if (cfg_.economics.equivocation_slash.num > 0 && equivocations_slashed_.insert(key).second)
            slash(vnames_[rep.first.voter], cfg_.economics.equivocation_slash, "vote equivocation", n.name);
    }
    for (const auto& a : out.alarms) {
        (void)a;
        if (n.honest)
            ++report_.safety_alarms;
    }
    for (const auto& f : out.finalized)
        on_finalized(n, f);
}

void Engine::on_finalized(Node& n, const grandpa::FinalizedEntry& f)
{
    // node-local: relative time synchronisation over newly finalized blocks
    if (n.sync) {
        for (const auto* e : n.tree->path(n.synced_to, f.block)) {
            n.sync_arrivals.push_back({e->slot(), n.arrival.at(e->hash())});
            if (n.sync->on_finalized(e->slot())) {
                auto target = n.sync->boundary() + cfg_.clock.sync_gap_slots;
                auto est = babe::relative_time_sync(n.sync_arrivals, target, cfg_.slot_ticks);
                n.anchor_slot = target;
                n.anchor_local = est;
                n.sync_arrivals.clear();
                if (n.honest)
                    sync_estimates_[n.sync->epochs()][n.id] = n.clock.global(est);
            }
        }
    }
    n.synced_to = f.block;
    if (!n.honest)
        return;

    // harness record
    for (auto& other : final_head_) {
        if (!other)
            continue;
        if (!all_->comparable(other->block, f.block)) {
            ++conflict_count_;
            if (conflicts_.size() < 32)
                conflicts_.emplace_back(other->justification, f.justification);
        }
    }
    const auto* prev = final_head_[n.id] ? &*final_head_[n.id] : nullptr;
    Digest from = prev ? prev->block : all_->genesis().hash();
    for (const auto* e : all_->path(from, f.block)) {
        if (!first_final_.emplace(e->hash(), now_).second)
            continue;
        points_.award(vnames_[e->block->header.author], econ::PayableAction::relay_block_produced);
        for (const auto& ex : e->block->body.extrinsics) {
            if (ex.call != runtime::Call::candidates)
                continue;
            for (const auto& r : runtime::candidates_of(ex)) {
                for (const auto& a : r.attestations)
                    points_.award(vnames_[a.validator], econ::PayableAction::parachain_block_validated);
                auto& t = truth_[r.hash()];
                if (!t.valid) {
                    ++report_.invalid_finalized;
                    if (t.honest_checker)
                        ++report_.invalid_finalized_with_honest_checker;
                }
            }
        }
    }
    final_head_[n.id] = f;
}

bool Engine::approved(const Node& n, const Digest& ch) const
{
    auto it = n.cands.find(ch);
    if (it == n.cands.end())
        return false;
    const auto& c = it->second;
    if (!c.available_at || now_ < *c.available_at + 6 * cfg_.delta + 1)
        return false;
    if (c.outcome_invalid)
        return !*c.outcome_invalid;
    return !c.invalid_seen;
}

bool Engine::votable(const Node& n, const TreeEntry& e) const
{
    if (e.bad)
        return false;
    auto it = n.block_cands.find(e.hash());
    if (it == n.block_cands.end())
        return true;
    return std::all_of(it->second.begin(), it->second.end(), [&](const Digest& c) { return approved(n, c); });
}

// ---------------------------------------------------------------- parachains

const std::vector<uint32_t>& Engine::group_of(uint64_t era, ParaId p)
{
    auto key = std::make_pair(era, p);
    if (auto it = groups_.find(key); it != groups_.end())
        return it->second;
    const auto P = cfg_.parachains.count;
    if (cfg_.adversary.capture_group && !report_.adversaries.empty()) {
        // the adversaries take parachain 0; the rest rotate among the others
        std::vector<uint32_t> rest;
        for (uint32_t v = 0; v < nval_; ++v)
            if (vhonest_[v])
                rest.push_back(v);
        groups_[{era, 0}] = report_.adversaries;
        if (P > 1) {
            auto rot = rotate_assignments(era, static_cast<uint32_t>(rest.size()), P - 1, rotation_randomness_);
            for (auto& [q, members] : rot) {
                std::vector<uint32_t> g;
                for (auto i : members)
                    g.push_back(rest[i]);
                groups_[{era, q + 1}] = g;
            }
        }
    } else {
        for (auto& [q, members] : rotate_assignments(era, nval_, P, rotation_randomness_))
            groups_[{era, q}] = members;
    }
    return groups_[key];
}

Bytes Engine::para_head(const trie::StateTrie& s, ParaId p) const
{
    if (auto h = runtime::Runtime::para_head(s, p))
        return *h;
    return para::genesis_head(kinds_[p], kinds_[p] == para::StvfKind::ledger ? ledger_genesis_
                                                                              : std::map<std::string, uint64_t>{})
        .encode();
}

const xcmp::ForkView& Engine::fork_to(const Node& n, const Digest& block)
{
    if (auto it = fork_memo_.find(block); it != fork_memo_.end())
        return *it->second;
    const auto& e = n.tree->at(block);
    std::shared_ptr<xcmp::ForkView> view;
    if (!e.parent) {
        view = std::make_shared<xcmp::ForkView>();
    } else {
        view = std::make_shared<xcmp::ForkView>(fork_to(n, e.parent->hash()));
    }
    view->blocks.push_back(e.block->relay_entry);
    fork_memo_[block] = view;
    return *view;
}

void Engine::collate(Node& n, const TreeEntry& rp)
{
    n.collated_on.insert(rp.hash());
    const auto p = n.para;
    auto pov = std::make_shared<para::PovBlock>();
    pov->para = p;
    pov->parent_head = para_head(n.states.at(rp.hash()), p);
    auto seq = n.collations++;
    bool bad = cfg_.parachains.adversarial_collators.contains(p);
    switch (kinds_[p]) {
    case para::StvfKind::ledger:
        pov->payload = to_bytes(bad ? "alice>bob:999999999;" : (seq % 2 ? "bob>alice:1;" : "alice>bob:1;"));
        break;
    default:
        pov->payload = to_bytes(bad ? "+x" : "+1");
        break;
    }
    auto coin = hash({as_view("message"), ByteWriter().u64(cfg_.seed).u32(p).bytes(), rp.hash().view()});
    auto draw = ByteReader(coin.view()).u64();
    const auto P = cfg_.parachains.count;
    if (P > 1 && draw % cfg_.parachains.message_rate.den < cfg_.parachains.message_rate.num) {
        ParaId dest = static_cast<ParaId>((p + 1 + (draw >> 32) % (P - 1)) % P);
        pov->outgoing[dest].push_back(to_bytes("m/" + std::to_string(p) + "/" + std::to_string(seq)));
    }
    CollationMsg m{pov, rp.hash()};
    for (auto v : group_of(era_of_slot(rp.slot() + 1), p))
        for (auto id : personas_[v])
            send(n.id, id, m);
}

const erasure::ErasurePieces& Engine::pieces_of(const para::PovBlock& pov)
{
    auto h = pov.hash();
    auto it = erasure_memo_.find(h);
    if (it == erasure_memo_.end())
        it = erasure_memo_.emplace(h, erasure::encode(pov.encode(), nval_)).first;
    return it->second;
}

StvfOutcome Engine::check_pov(const para::PovBlock& pov, const Node& n, const TreeEntry& rp)
{
    auto key = std::make_pair(pov.hash(), rp.hash());
    if (auto it = stvf_memo_.find(key); it != stvf_memo_.end())
        return it->second;
    StvfOutcome out;
    if (pov.para < cfg_.parachains.count) {
        para::RelayInputs in;
        in.fork = &fork_to(n, rp.hash());
        in.max_para = cfg_.parachains.count - 1;
        in.max_batches = cfg_.parachains.max_batches;
        auto res = para::stvf_validate(kinds_[pov.para], pov, para_head(n.states.at(rp.hash()), pov.para), in);
        out = {res.valid, std::move(res.head), std::move(res.outgoing)};
    }
    stvf_memo_.emplace(key, out);
    return out;
}

void Engine::on_collation(Node& n, const CollationMsg& m)
{
    const auto* rp = n.tree->find(m.relay_parent);
    if (!rp) {
        n.waiting_collations.push_back(m);
        return;
    }
    const auto& pov = *m.pov;
    if (pov.para >= cfg_.parachains.count || !in_group(era_of_slot(rp->slot() + 1), pov.para, n.validator))
        return;
    auto res = check_pov(pov, n, *rp);
    bool liar = n.has(Script::invalid_candidate);
    if (!res.valid && !liar) {
        n.rejected_povs.insert(pov.hash());
        return;
    }
    auto parent = para::HeadData::decode(para_head(n.states.at(rp->hash()), pov.para));
    Bytes head = res.head;
    xcmp::Outgoing outgoing = res.outgoing;
    if (!res.valid) {
        // fabricated successor: right shape, wrong state
        auto h = parent;
        h.number += 1;
        h.app_state = pov.payload;
        auto c = xcmp::build_commitment(h.out_heads, pov.outgoing);
        h.message_root = c.message_root;
        h.out_heads = c.heads;
        head = h.encode();
        outgoing = pov.outgoing;
    }
    const auto& pieces = pieces_of(pov);
    auto info = std::make_shared<CandidateInfo>();
    info->receipt = {pov.para, rp->hash(), head, pov.hash(), pieces.root, nval_, {}};
    info->hash = info->receipt.hash();
    info->header.para = pov.para;
    info->header.para_block = pov.hash();
    info->header.commitment = xcmp::build_commitment(parent.out_heads, outgoing);
    info->header.prev_heads = parent.out_heads;
    info->header.outbox = outgoing;
    info->relay_parent_slot = rp->slot();
    auto& t = truth_[info->hash];
    t.valid = res.valid;
    t.para = pov.para;

    auto& c = n.cands[info->hash];
    add_info(n, c, info);
    c.my_verdict = true; // an attester stands by its statement
    auto sig = crypto::sign(vkeys_[n.validator].secret, para::attestation_message(info->receipt));
    StatementMsg st{info, n.validator, sig};
    on_statement(n, st);
    broadcast_validators(n, st);
    if (!n.has(Script::withhold_pieces))
        for (const auto& piece : pieces.pieces) {
            auto pp = std::make_shared<const erasure::Piece>(piece);
            for (auto id : personas_[piece.index])
                if (id == n.id)
                    on_piece(n, {info->hash, pp, false});
                else
                    send(n.id, id, PieceMsg{info->hash, pp, false});
        }
}

void Engine::add_info(Node& n, Cand& c, const InfoPtr& info)
{
    if (c.info)
        return;
    c.info = info;
    n.cands_by_parent[info->receipt.relay_parent].push_back(info->hash);
}

void Engine::on_statement(Node& n, const StatementMsg& m)
{
    if (n.role != Role::validator)
        return;
    const auto& r = m.info->receipt;
    if (r.para >= cfg_.parachains.count || m.info->hash != r.hash() ||
        !in_group(era_of_slot(m.info->relay_parent_slot + 1), r.para, m.validator))
        return;
    if (!registry_.verify(vpubs_[m.validator], para::attestation_message(r), m.sig))
        return;
    auto& c = n.cands[m.info->hash];
    add_info(n, c, m.info);
    c.attest.emplace(m.validator, m.sig);
}

std::vector<std::pair<para::CandidateReceipt, xcmp::IncludedHeader>> Engine::pick_candidates(Node& n,
                                                                                            const TreeEntry& parent)
{
    std::map<ParaId, std::pair<Digest, const Cand*>> best;
    auto it = n.cands_by_parent.find(parent.hash());
    if (it == n.cands_by_parent.end())
        return {};
    auto era = era_of_slot(parent.slot() + 1);
    for (const auto& ch : it->second) {
        const auto& c = n.cands.at(ch);
        if (!c.info || c.info->relay_parent_slot != parent.slot() || (c.outcome_invalid && *c.outcome_invalid))
            continue;
        auto p = c.info->receipt.para;
        const auto& g = group_of(era, p);
        if (c.attest.size() < para::attestation_threshold(g.size()))
            continue;
        auto cur = best.find(p);
        if (cur == best.end() || ch < cur->second.first)
            best[p] = {ch, &c};
    }
    std::vector<std::pair<para::CandidateReceipt, xcmp::IncludedHeader>> out;
    for (const auto& [p, entry] : best) {
        const auto& c = *entry.second;
        auto r = c.info->receipt;
        for (const auto& [v, sig] : c.attest)
            r.attestations.push_back({v, sig});
        out.emplace_back(std::move(r), c.info->header);
    }
    return out;
}

void Engine::included(Node& n, const babe::Block& b)
{
    if (n.role == Role::collator)
        return;
    std::vector<para::CandidateReceipt> receipts;
    for (const auto& e : b.body.extrinsics)
        if (e.call == runtime::Call::candidates)
            receipts = runtime::candidates_of(e);
    if (receipts.empty() || receipts.size() != b.relay_entry->included.size())
        return;
    auto& list = n.block_cands[b.hash];
    for (size_t i = 0; i < receipts.size(); ++i) {
        const auto& r = receipts[i];
        auto ch = r.hash();
        list.push_back(ch);
        auto& c = n.cands[ch];
        if (!c.info) {
            auto info = std::make_shared<CandidateInfo>();
            info->receipt = r;
            info->receipt.attestations.clear();
            info->hash = ch;
            info->header = b.relay_entry->included[i];
            info->relay_parent_slot = n.tree->at(r.relay_parent).slot();
            add_info(n, c, info);
        }
        c.blocks.push_back(b.hash);

        // harness: attesters and whether an honest assignee could object
        auto& t = truth_[ch];
        if (t.attesters.empty()) {
            for (const auto& a : r.attestations)
                t.attesters.push_back(a.validator);
            const auto& g = group_of(era_of_slot(n.tree->at(r.relay_parent).slot() + 1), r.para);
            t.group_size = g.size();
            for (auto v : g)
                if (vhonest_[v])
                    t.honest_checker = true;
            ++report_.candidates_included;
            if (!t.valid)
                ++report_.invalid_included;
        }

        if (c.outcome_invalid && *c.outcome_invalid && !n.tree->is_ancestor(b.hash, n.tree->last_finalized()))
            n.tree->mark_bad(b.hash);
        if (n.role == Role::validator) {
            if (n.rejected_povs.contains(r.pov_hash) && !n.has(Script::invalid_candidate)) {
                c.my_verdict = false;
                send_verdict(n, ch, c, false);
            }
            maybe_vote_available(n, ch, c);
            check_available(n, ch, c);
            timer(n.id, now_ + cfg_.parachains.availability_timeout_slots * cfg_.slot_ticks,
                  CandidateTimer{CandidateTimer::unavailability, ch, b.hash});
        } else if (n.role == Role::fisherman && !c.fisher_scheduled) {
            c.fisher_scheduled = true;
            auto coin = hash({as_view("fisherman"), ByteWriter().u64(cfg_.seed).u32(n.id).bytes(), ch.view()});
            if (ByteReader(coin.view()).u64() % cfg_.fishermen.report_probability.den <
                cfg_.fishermen.report_probability.num)
                timer(n.id, now_ + cfg_.fishermen.delay_ticks, CandidateTimer{CandidateTimer::fisherman, ch, b.hash});
        }
    }
}

void Engine::maybe_vote_available(Node& n, const Digest& ch, Cand& c)
{
    if (c.avail_voted || !c.piece || n.has(Script::withhold_pieces))
        return;
    c.avail_voted = true;
    AvailabilityMsg m{ch, n.validator};
    broadcast_validators(n, m);
    on_availability(n, m);
}

void Engine::on_piece(Node& n, const PieceMsg& m)
{
    if (n.role == Role::collator)
        return;
    auto& c = n.cands[m.candidate];
    if (m.response) {
        if (!c.fetching || c.fetch_done)
            return;
        c.fetched.emplace(m.piece->index, m.piece);
        if (c.fetched.size() >= erasure::threshold(nval_))
            finish_fetch(n, m.candidate, c);
        return;
    }
    if (n.role != Role::validator || m.piece->index != n.validator || c.piece)
        return;
    c.piece = m.piece;
    maybe_vote_available(n, m.candidate, c);
}

void Engine::on_piece_request(Node& n, uint32_t from, const PieceRequest& m)
{
    auto it = n.cands.find(m.candidate);
    if (it == n.cands.end() || !it->second.piece || n.has(Script::withhold_pieces))
        return;
    send(n.id, from, PieceMsg{m.candidate, it->second.piece, true});
}

void Engine::on_availability(Node& n, const AvailabilityMsg& m)
{
    if (n.role != Role::validator)
        return;
    auto& c = n.cands[m.candidate];
    c.avail.insert(m.validator);
    check_available(n, m.candidate, c);
}

// available once included here and more than 2/3 of validators hold their piece
void Engine::check_available(Node& n, const Digest& ch, Cand& c)
{
    if (!c.available_at && 3 * c.avail.size() > 2 * static_cast<size_t>(nval_) && c.info && !c.blocks.empty()) {
        c.available_at = now_;
        on_available(n, ch, c);
    }
}

void Engine::on_available(Node& n, const Digest& ch, Cand& c)
{
    const auto* b = n.tree->find(c.blocks.front());
    if (!b || !b->parent)
        return;
    auto r = n.tree->randomness_for(*b->parent, babe::epoch_of(b->slot(), epoch_.length), epoch_);
    auto count = para::secondary_checker_count(c.invalid_reports, 0, cfg_.parachains.checker_base, nval_);
    bool selected = false;
    if (!(cfg_.adversary.rig_checkers && n.honest))
        selected = para::checker_selected(crypto::vrf_eval(vkeys_[n.validator].secret, para::checker_lottery_input(r, ch)),
                                          count, nval_);
    if (!selected)
        return;
    if (n.honest)
        truth_[ch].honest_checker = true;
    if (n.has(Script::invalid_candidate))
        send_verdict(n, ch, c, true);
    else
        start_fetch(n, ch, c);
}

void Engine::start_fetch(Node& n, const Digest& ch, Cand& c)
{
    if (c.fetching)
        return;
    if (c.my_verdict) {
        if (n.role == Role::validator)
            send_verdict(n, ch, c, *c.my_verdict);
        return;
    }
    c.fetching = true;
    if (c.piece)
        c.fetched.emplace(c.piece->index, c.piece);
    for (auto id : validator_nodes_)
        if (id != n.id)
            send(n.id, id, PieceRequest{ch});
}

void Engine::finish_fetch(Node& n, const Digest& ch, Cand& c)
{
    c.fetch_done = true;
    bool valid = false;
    if (c.info) {
        try {
            std::vector<erasure::Piece> ps;
            for (const auto& [_, p] : c.fetched)
                ps.push_back(*p);
            auto blob = erasure::reconstruct(ps, nval_, c.info->receipt.erasure_root);
            auto pov = para::PovBlock::decode(blob);
            const auto* rp = n.tree->find(c.info->receipt.relay_parent);
            if (rp && pov.hash() == c.info->receipt.pov_hash && pov.para == c.info->receipt.para) {
                auto res = check_pov(pov, n, *rp);
                valid = res.valid && res.head == c.info->receipt.head_data && res.outgoing == c.info->header.outbox;
            }
        } catch (const Error&) {
            valid = false;
        }
    }
    c.my_verdict = valid;
    if (n.role == Role::validator) {
        send_verdict(n, ch, c, valid);
    } else if (!valid) {
        ReportMsg m{ch, n.name};
        for (auto id : validator_nodes_)
            send(n.id, id, m);
    }
}

void Engine::send_verdict(Node& n, const Digest& ch, Cand& c, bool valid)
{
    if (c.verdict_sent)
        return;
    c.verdict_sent = true;
    VerdictMsg m{ch, n.validator, valid};
    broadcast_validators(n, m);
    on_verdict(n, m);
}

void Engine::join_dispute(Node& n, const Digest& ch, Cand& c)
{
    if (c.verdict_sent)
        return;
    if (n.has(Script::invalid_candidate))
        send_verdict(n, ch, c, true);
    else
        start_fetch(n, ch, c);
}

void Engine::on_verdict(Node& n, const VerdictMsg& m)
{
    if (n.role != Role::validator)
        return;
    auto& c = n.cands[m.candidate];
    if (!c.verdicts.emplace(m.validator, m.valid).second)
        return;
    if (!m.valid) {
        if (!c.invalid_seen && n.honest)
            disputes_.insert(m.candidate);
        c.invalid_seen = true;
        ++c.invalid_reports;
        join_dispute(n, m.candidate, c);
    }
    if (c.outcome_invalid)
        return;
    size_t invalid = 0, valid = 0;
    for (const auto& [_, v] : c.verdicts)
        (v ? valid : invalid) += 1;
    if (3 * invalid > 2 * static_cast<size_t>(nval_))
        conclude_invalid(n, m.candidate, c);
    else if (3 * valid > 2 * static_cast<size_t>(nval_) && c.invalid_seen)
        c.outcome_invalid = false;
}

void Engine::on_report(Node& n, const ReportMsg& m)
{
    if (n.role != Role::validator)
        return;
    auto& c = n.cands[m.candidate];
    ++c.invalid_reports;
    if (!c.invalid_seen && n.honest)
        disputes_.insert(m.candidate);
    c.invalid_seen = true;
    if (c.reporter.empty())
        c.reporter = m.reporter;
    join_dispute(n, m.candidate, c);
}

void Engine::conclude_invalid(Node& n, const Digest& ch, Cand& c)
{
    c.outcome_invalid = true;
    bool changed = false;
    for (const auto& b : c.blocks) {
        if (n.tree->is_ancestor(b, n.tree->last_finalized()))
            continue;
        if (!n.tree->is_bad(b)) {
            n.tree->mark_bad(b);
            changed = true;
            if (n.honest)
                reverted_.insert(b);
        }
    }
    if (n.honest)
        slash_invalid(ch, c.reporter.empty() ? n.name : c.reporter);
    if (changed)
        after_change(n);
}

void Engine::on_candidate_timer(Node& n, const CandidateTimer& t)
{
    auto& c = n.cands[t.candidate];
    if (t.kind == CandidateTimer::fisherman) {
        start_fetch(n, t.candidate, c);
        return;
    }
    if (c.available_at || !n.tree->contains(t.block) || n.tree->is_bad(t.block) ||
        n.tree->is_ancestor(t.block, n.tree->last_finalized()))
        return;
    n.tree->mark_bad(t.block);
    if (n.honest) {
        reverted_.insert(t.block);
        auto& tr = truth_[t.candidate];
        if (!tr.counted_unavailable) {
            tr.counted_unavailable = true;
            ++report_.unavailable;
        }
    }
    after_change(n);
}

// ---------------------------------------------------------------- harness

void Engine::slash(const std::string& offender, Ratio fraction, const std::string& reason, const std::string& reporter)
{
    if (supports_[offender].total() == 0)
        return;
    auto out = econ::slash(offender, fraction, supports_);
    supports_[offender] = out.remaining;
    free_[reporter] += out.reporter_reward;
    treasury_ += out.to_treasury;
    burned_ += out.burned;
    report_.slashes.push_back({now_, offender, reason, out.total});
    report_.slash_total += out.total;
}

void Engine::slash_invalid(const Digest& candidate, const std::string& reporter)
{
    auto& t = truth_[candidate];
    if (t.slashed)
        return;
    t.slashed = true;
    para::ValidityReport rep{para::ReportKind::fisherman_invalid, reporter, candidate, cfg_.fishermen.bond, true};
    std::map<Digest, para::CandidateRecord> records{{candidate, {t.attesters, true, true}}};
    auto effects = para::process_report(rep, records);
    uint64_t min_support = UINT64_MAX;
    for (auto v : effects.slash_validators)
        if (auto s = supports_[vnames_[v]].total(); s > 0)
            min_support = std::min(min_support, s);
    for (auto v : effects.slash_validators)
        slash(vnames_[v], cfg_.economics.invalidity_slash, "invalid candidate", reporter);
    if (min_support != UINT64_MAX) {
        report_.min_attester_support = report_.min_attester_support ? std::min(report_.min_attester_support, min_support)
                                                                    : min_support;
        report_.attestation_threshold = std::max(report_.attestation_threshold, para::attestation_threshold(t.group_size));
    }
}

void Engine::on_global(const GlobalEvent& g)
{
    switch (g.kind) {
    case GlobalEvent::era_end:
        era_end(g.arg);
        break;
    case GlobalEvent::workload:
        workload(g.arg);
        break;
    case GlobalEvent::referendum:
        referendum(g.arg);
        break;
    case GlobalEvent::sample:
        sample();
        break;
    }
}

void Engine::era_end(uint64_t era)
{
    const auto eras_per_year = cfg_.economics.issuance.eras_per_year;
    uint64_t index = era - 1;
    if (index % eras_per_year == 0)
        supply_year_start_ = supply();
    uint64_t staked = 0;
    for (const auto& [_, s] : supports_)
        staked += s.total();
    auto total = supply();
    auto payout = econ::era_payout({staked, std::max<uint64_t>(total, 1)}, cfg_.economics.issuance, supply_year_start_,
                                   static_cast<uint32_t>(index % eras_per_year));
    uint64_t rem = 0;
    auto slots = points_.distribute(payout.stakers, rem);
    uint64_t paid = 0;
    for (const auto& [v, amount] : slots) {
        if (supports_[v].total() == 0)
            continue; // fully slashed: the share falls to the treasury below
        auto split = econ::split_reward(amount, supports_[v], cfg_.economics.commission);
        free_[v] += split.commission;
        for (const auto& [who, share] : split.stake_shares)
            free_[who] += share;
        paid += split.total();
    }
    treasury_ += payout.treasury + rem + (payout.stakers - rem - paid);
    minted_ += payout.minted;
    staker_rewards_ += paid;
    points_ = econ::PointsLedger(vnames_);
    ++report_.eras;
}

void Engine::workload(uint64_t slot)
{
    const auto& w = cfg_.workload;
    if (w.users < 2)
        return;
    auto rate = w.transfers_per_slot;
    uint64_t k = rate.num / rate.den;
    if (work_rng_.below(rate.den) < rate.num % rate.den)
        ++k;
    for (uint64_t i = 0; i < k; ++i) {
        auto from = static_cast<runtime::AccountId>(1 + work_rng_.below(w.users));
        auto to = static_cast<runtime::AccountId>(1 + (from + work_rng_.below(w.users - 1)) % w.users);
        auto kp = registry_.generate("user-" + std::to_string(from));
        auto tx = runtime::signed_by(runtime::make_transfer(to, 1 + work_rng_.below(100)), from, user_nonce_[from]++,
                                     kp.secret);
        tx_submitted_.emplace(tx.hash(), slot);
        ++report_.txs_submitted;
        auto msg = std::make_shared<const runtime::Extrinsic>(std::move(tx));
        for (auto id : validator_nodes_)
            send(client, id, TxMsg{msg});
    }
}

void Engine::referendum(uint64_t index)
{
    const auto& ref = cfg_.referenda[index];
    Rng rng(cfg_.seed, "referendum-" + std::to_string(index));
    std::vector<gov::Ballot> ballots;
    uint64_t electorate = 0;
    for (const auto& [id, stake] : nominators_) {
        electorate += stake;
        if (!rng.chance(ref.turnout))
            continue;
        ballots.push_back({id, stake, rng.chance(ref.aye_share), gov::Conviction::locked1});
    }
    bool ok = gov::tally(ballots, electorate, ref.bias);
    report_.referenda_approved.push_back(ok);
    if (!ok || !ref.set_code)
        return;
    auto kp = registry_.generate("governance");
    auto tx = runtime::signed_by(runtime::make_set_code(*ref.set_code), governance_account, gov_nonce_++, kp.secret);
    auto msg = std::make_shared<const runtime::Extrinsic>(std::move(tx));
    for (auto id : validator_nodes_)
        send(client, id, TxMsg{msg});
}

// common-prefix sample across honest validator heads
void Engine::sample()
{
    std::vector<const TreeEntry*> heads;
    for (auto id : validator_nodes_) {
        const auto& n = *nodes_[id];
        if (n.honest)
            heads.push_back(&all_->at(n.tree->best_head().hash()));
    }
    ++cp_samples_;
    for (const auto* a : heads)
        for (const auto* b : heads)
            if (a != b && a->number() > all_->lca(*a, *b).number() + cfg_.common_prefix_depth) {
                ++cp_violations_;
                return;
            }
}

MetricsReport Engine::run()
{
    while (!queue_.empty()) {
        if (queue_.top().at > end_)
            break;
        Event e = queue_.top();
        queue_.pop();
        now_ = e.at;
        dispatch(e);
    }
    while (!queue_.empty()) {
        if (queue_.top().network)
            ++report_.messages_in_flight;
        queue_.pop();
    }
    now_ = end_;
    MetricsReport r = std::move(report_);
    finish(r);
    return r;
}

void Engine::finish(MetricsReport& r)
{
    r.scenario = cfg_.name;
    r.seed = cfg_.seed;
    r.slots = cfg_.slots;
    r.ticks = end_;
    r.validators = nval_;
    r.out_of_model = cfg_.adversary.scripts.contains(Script::split_brain) || cfg_.adversary.rig_checkers ||
                     cfg_.adversary.capture_group;

    const Node* ref = nullptr;
    for (auto id : validator_nodes_)
        if (nodes_[id]->honest) {
            ref = nodes_[id].get();
            break;
        }
    if (!ref)
        ref = nodes_[validator_nodes_.front()].get();
    const auto& head = ref->tree->best_head();
    auto chain = ref->tree->path(ref->tree->genesis().hash(), head.hash());
    r.best_height = head.number();
    r.chain_length = chain.size();
    std::unordered_set<Digest> on_chain;
    for (const auto* e : chain) {
        on_chain.insert(e->hash());
        if (vhonest_[e->block->header.author])
            ++r.honest_blocks_on_chain;
    }
    r.fork_blocks = r.blocks_produced - std::min(r.blocks_produced, r.chain_length);

    uint64_t fin = UINT64_MAX;
    for (auto id : validator_nodes_) {
        const auto& n = *nodes_[id];
        if (!n.honest)
            continue;
        fin = std::min(fin, n.tree->at(n.tree->last_finalized()).number());
        if (n.voter)
            r.finality_rounds = std::max<uint64_t>(r.finality_rounds, n.voter->round());
    }
    r.finalized_height = fin == UINT64_MAX ? 0 : fin;

    std::vector<uint64_t> lags;
    for (const auto* e : chain)
        if (auto it = first_final_.find(e->hash()); it != first_final_.end())
            lags.push_back((it->second - produced_at_.at(e->hash())) / cfg_.slot_ticks);
    r.finality_lag = Summary::of(std::move(lags));

    // per-epoch growth and honest primaries over completed epochs
    uint64_t epochs = cfg_.slots / cfg_.epoch_length;
    std::vector<uint64_t> growth(epochs + 1, 0), honest_primary(epochs + 1, 0);
    for (const auto* e : chain) {
        auto m = babe::epoch_of(e->slot(), cfg_.epoch_length);
        if (m == 0 || m > epochs)
            continue;
        ++growth[m];
        if (e->block->header.claim == babe::Claim::primary && vhonest_[e->block->header.author])
            ++honest_primary[m];
    }
    r.epochs = epochs;
    r.min_epoch_growth = epochs ? UINT64_MAX : 0;
    for (uint64_t m = 1; m <= epochs; ++m) {
        r.min_epoch_growth = std::min(r.min_epoch_growth, growth[m]);
        if (honest_primary[m] == 0)
            ++r.epochs_without_honest_primary;
    }
    constexpr uint64_t window = 100;
    if (cfg_.slots >= window) {
        std::vector<uint64_t> per_slot(cfg_.slots + 2, 0);
        for (const auto* e : chain)
            if (e->slot() <= cfg_.slots)
                ++per_slot[e->slot()];
        uint64_t in_window = 0;
        r.min_window_growth = UINT64_MAX;
        for (uint64_t s = 1; s <= cfg_.slots; ++s) {
            in_window += per_slot[s];
            if (s > window)
                in_window -= per_slot[s - window];
            if (s >= window)
                r.min_window_growth = std::min(r.min_window_growth, in_window);
        }
    }
    r.common_prefix_samples = cp_samples_;
    r.common_prefix_violations = cp_violations_;

    // accountable safety
    r.safety.conflicts = conflict_count_;
    r.safety.total_weight = voter_set_.total();
    if (!conflicts_.empty()) {
        std::optional<grandpa::AuditResult> best;
        for (const auto& [a, b] : conflicts_) {
            auto res = grandpa::audit(a, b, voter_set_);
            if (!best || (res.same_round && !best->same_round) ||
                (res.same_round == best->same_round && res.weight > best->weight))
                best = res;
        }
        r.safety.same_round = best->same_round;
        r.safety.culprit_weight = best->weight;
        r.safety.culprits.assign(best->culprits.begin(), best->culprits.end());
        r.safety.detected = 3 * best->weight >= r.safety.total_weight;
    }

    r.disputes = disputes_.size();
    r.reverted_blocks = reverted_.size();

    if (cfg_.parachains.count > 0) {
        XcmpInputs in;
        in.blocks = all_.get();
        in.head_at = [this](const Digest& b, ParaId p) { return para_head(*exec_memo_.at(b), p); };
        in.max_para = cfg_.parachains.count - 1;
        in.max_batches = cfg_.parachains.max_batches;
        in.reference = on_chain;
        for (const auto& [h, st] : exec_memo_) {
            (void)st;
            const auto* e = all_->find(h);
            if (!e)
                continue;
            for (const auto& ex : e->block->body.extrinsics)
                if (ex.call == runtime::Call::candidates)
                    for (const auto& rc : runtime::candidates_of(ex))
                        if (!truth_[rc.hash()].valid)
                            in.skip.insert(h);
        }
        exec_memo_[all_->genesis().hash()] = ref->states.at(all_->genesis().hash());
        audit_xcmp(in, r);
    }

    std::vector<uint64_t> latency;
    for (const auto* e : chain)
        for (const auto& ex : e->block->body.extrinsics)
            if (auto it = tx_submitted_.find(ex.hash()); it != tx_submitted_.end()) {
                latency.push_back(e->slot() - std::min(e->slot(), it->second));
                ++r.txs_included;
            }
    r.inclusion_latency = Summary::of(std::move(latency));

    for (const auto& [epoch, est] : sync_estimates_) {
        (void)epoch;
        if (est.size() < 2)
            continue;
        ++r.sync_epochs;
        uint64_t lo = UINT64_MAX, hi = 0;
        for (const auto& [_, t] : est) {
            lo = std::min(lo, t);
            hi = std::max(hi, t);
        }
        r.max_sync_spread = std::max(r.max_sync_spread, hi - lo);
    }

    r.minted = minted_;
    r.staker_rewards = staker_rewards_;
    r.treasury = treasury_;
    r.burned = burned_;
    r.supply_start = supply_start_;
    r.supply_end = supply();
    r.code_variant = runtime::Runtime::code_variant(ref->states.at(ref->tree->last_finalized()));

    auto& v = r.violations;
    v["conflicting_finality"] = r.safety.conflicts > 0;
    v["common_prefix"] = r.common_prefix_violations > 0;
    v["chain_growth"] = cfg_.growth_floor > 0 && cfg_.slots >= window && r.min_window_growth < cfg_.growth_floor;
    v["safety_alarm"] = r.safety_alarms > 0;
    v["invalid_finalized_with_honest_checker"] = r.invalid_finalized_with_honest_checker > 0;
    v["xcmp_fifo"] = r.xcmp_fifo_violations > 0;
    v["xcmp_batch"] = r.xcmp_batch_violations > 0;
    v["xcmp_watermark"] = r.xcmp_watermark_violations > 0;
    v["xcmp_fork"] = r.xcmp_fork_violations > 0;
    v["delivery"] = r.max_delay > cfg_.delta ||
                    r.messages_delivered + r.messages_in_flight != r.messages_sent;
    v["supply_conservation"] = r.supply_start + r.minted != r.supply_end + r.burned;

    std::array<uint8_t, 32> out{};
    crypto_generichash_final(&trace_state_, out.data(), out.size());
    r.trace_hash = to_hex(out);
}

} // namespace

MetricsReport run(const ScenarioConfig& config, const TraceSink& trace)
{
    config.validate();
    Engine e(config, trace);
    return e.run();
}

} // namespace relaylab::sim
