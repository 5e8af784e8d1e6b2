// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <relaylab/babe.hpp>

#include <functional>
#include <map>
#include <set>
#include <variant>

// Finality by rounds of prevotes and precommits aggregated with the 2/3-GHOST
// rule. All thresholds are strict: weight w is a supermajority of W when
// 3w > 2W. A voter that signs two different votes in one stage of a round is
// an equivocator and its weight counts toward every block.
namespace relaylab::grandpa {

using VoterId = uint32_t;

enum class Stage : uint8_t { prevote, precommit };
std::string to_string(Stage s);

struct SignedVote {
    uint64_t round = 0;
    Stage stage = Stage::prevote;
    Digest block;
    uint64_t number = 0;
    VoterId voter = 0;
    crypto::Signature sig;

    // "vote" | u64 round | u8 stage | block | u64 number
    Bytes message() const;
    bool same_target(const SignedVote& o) const { return block == o.block; }
};

SignedVote sign_vote(uint64_t round, Stage stage, const Digest& block, uint64_t number, VoterId voter,
                     const crypto::SecretKey& secret);

struct VoterSet {
    std::vector<crypto::PublicKey> keys;
    std::vector<uint64_t> weights;

    static VoterSet equal(std::vector<crypto::PublicKey> keys);
    size_t size() const { return keys.size(); }
    uint64_t total() const;
    bool contains(VoterId v) const { return v < keys.size(); }
    // round mod |set| into the fixed ordering
    VoterId primary_for_round(uint64_t round) const;
    bool verify(const SignedVote& v, const crypto::KeyRegistry& registry) const;
};

inline bool supermajority(uint64_t w, uint64_t total) { return 3 * static_cast<unsigned __int128>(w) > 2 * static_cast<unsigned __int128>(total); }

struct EquivocationReport {
    SignedVote first;
    SignedVote second;
};

class VoteSet {
public:
    enum class Added { counted, duplicate, equivocation, ignored };

    VoteSet(uint64_t round, Stage stage, const VoterSet& voters) : round_(round), stage_(stage), voters_(&voters) {}

    // The first vote per voter counts; a second different vote makes the voter
    // an equivocator (reported once); anything after that is ignored. Callers
    // check signatures and membership.
    Added add(const SignedVote& v, std::optional<EquivocationReport>* report = nullptr);

    uint64_t round() const { return round_; }
    Stage stage() const { return stage_; }
    const VoterSet& voters() const { return *voters_; }
    const std::map<VoterId, SignedVote>& votes() const { return first_; }
    const std::map<VoterId, SignedVote>& equivocations() const { return second_; }
    bool is_equivocator(VoterId v) const { return second_.contains(v); }
    bool has_voted(VoterId v) const { return first_.contains(v); }
    uint64_t equivocator_weight() const;
    uint64_t voted_weight() const; // voters with at least one vote
    // Every counted vote plus the second vote of each equivocator.
    std::vector<SignedVote> all_votes() const;

private:
    uint64_t round_;
    Stage stage_;
    const VoterSet* voters_;
    std::map<VoterId, SignedVote> first_;
    std::map<VoterId, SignedVote> second_;
};

// Weight of the votes on `b` and its descendants, equivocators included.
// Votes on blocks outside the tree count for nothing.
uint64_t descendant_weight(const VoteSet& votes, const babe::BlockTree& tree, const Digest& b);

// Head of the chain grown from `base` by stepping into the unique child with
// a supermajority of descendant weight. nullopt when `base` itself lacks one.
std::optional<Digest> ghost(const VoteSet& votes, const babe::BlockTree& tree, const Digest& base);
// Total variant: `base` when nothing qualifies.
Digest ghost_2_3(const VoteSet& votes, const babe::BlockTree& tree, const Digest& base);

struct RoundView {
    std::optional<Digest> prevote_ghost;
    std::optional<Digest> precommit_ghost;
    Digest estimate;          // base when the prevotes have no supermajority
    bool completable = false;
};

// Estimate: the deepest ancestor of g(prevotes) that precommits could still
// carry past the threshold given the votes seen (unvoted and equivocating
// weight assumed favourable). Completable: precommits hold a supermajority and
// either the estimate is strictly above g(prevotes) or no child of g(prevotes)
// can still reach the threshold.
RoundView round_view(const VoteSet& prevotes, const VoteSet& precommits, const babe::BlockTree& tree,
                     const Digest& base);

struct Justification {
    uint64_t round = 0;
    Digest block;
    uint64_t number = 0;
    std::vector<SignedVote> precommits;

    std::string to_json() const;
    static Justification from_json(std::string_view text); // throws decode
};

// Replay: signatures, round/stage match and a supermajority of precommit
// weight on `block` (equivocators counted). Votes on unknown blocks count
// only through equivocation.
bool verify_justification(const Justification& j, const VoterSet& voters, const crypto::KeyRegistry& registry,
                          const babe::BlockTree& tree);

struct AuditResult {
    std::set<VoterId> culprits;
    uint64_t weight = 0;
    bool same_round = false; // culprits signed two different precommits in one round
};

// For two justifications of conflicting blocks: voters present in both. In a
// shared round they are provable equivocators.
AuditResult audit(const Justification& a, const Justification& b, const VoterSet& voters);

struct PrimaryProposal {
    uint64_t round = 0;
    Digest block;
    uint64_t number = 0;
    VoterId voter = 0;
    crypto::Signature sig;
    Bytes message() const; // "primary" | u64 round | block | u64 number
};

struct Commit {
    Justification justification;
};

using Message = std::variant<SignedVote, PrimaryProposal, Commit>;

struct FinalizedEntry {
    Digest block;
    uint64_t number = 0;
    uint64_t round = 0;
    Justification justification;
};

struct SafetyAlarm {
    Digest finalized;
    Digest conflicting;
    uint64_t round = 0;
};

struct Outbox {
    std::vector<Message> broadcast;
    std::vector<EquivocationReport> reports;
    std::vector<FinalizedEntry> finalized;
    std::vector<SafetyAlarm> alarms;
};

struct VoterConfig {
    uint64_t delta = 10; // network bound in ticks
};

// One node's view of the protocol. Round r starts once round r-1 is
// completable and this node precommitted in it. Prevote at t_r + 2 delta (or
// earlier once completable), precommit g(prevotes) at t_r + 4 delta (or
// earlier once completable) provided it descends from the previous estimate.
// Votes must be signed by a voter and comparable with the last finalized
// block; votes on unknown blocks wait for the block.
class Voter {
public:
    using Votable = std::function<bool(const babe::TreeEntry&)>;

    // `self` is nullopt for an observer that only tracks finality.
    Voter(std::optional<VoterId> self, const crypto::KeyPair* keys, const VoterSet& voters,
          const crypto::KeyRegistry& registry, babe::BlockTree& tree, VoterConfig cfg, Votable votable = {});

    void start(uint64_t now, Outbox& out);
    void on_message(const Message& m, uint64_t now, Outbox& out);
    void on_block_imported(uint64_t now, Outbox& out);
    void on_tick(uint64_t now, Outbox& out);

    uint64_t round() const { return current_; }
    const std::vector<FinalizedEntry>& log() const { return log_; }
    bool alarmed() const { return alarmed_; }
    size_t pending() const { return pending_.size(); }
    const VoteSet* votes(uint64_t round, Stage s) const;
    const RoundView* view(uint64_t round) const;
    // earliest time a timer may fire; for event scheduling
    std::optional<uint64_t> next_deadline() const;

private:
    struct Round {
        uint64_t number = 0;
        uint64_t start = 0;
        VoteSet prevotes;
        VoteSet precommits;
        std::optional<PrimaryProposal> proposal;
        bool proposed = false;
        bool prevoted = false;
        bool precommitted = false;
        RoundView view;
    };

    Round& round_state(uint64_t r);
    void begin_round(uint64_t r, uint64_t now, Outbox& out);
    void refresh(Round& rs);
    Digest prev_estimate(uint64_t r) const;
    std::optional<Digest> prev_prevote_ghost(uint64_t r) const;
    Digest best_votable_containing(const Digest& b) const;
    bool accept_vote(const SignedVote& v, Outbox& out);
    void try_finalize(Round& rs, Outbox& out);
    void apply_commit(const Commit& c, uint64_t now, Outbox& out);
    void finalize(const Digest& block, uint64_t round, Justification j, bool from_round, Outbox& out);
    void progress(uint64_t now, Outbox& out);
    bool descends(const Digest& a, const Digest& b) const { return tree_->is_ancestor(a, b); }

    std::optional<VoterId> self_;
    const crypto::KeyPair* keys_;
    const VoterSet* voters_;
    const crypto::KeyRegistry* registry_;
    babe::BlockTree* tree_;
    VoterConfig cfg_;
    Votable votable_;

    std::map<uint64_t, Round> rounds_;
    uint64_t current_ = 0;
    std::vector<Message> pending_; // waiting for blocks or future rounds
    std::vector<FinalizedEntry> log_;
    bool alarmed_ = false;
};

} // namespace relaylab::grandpa
