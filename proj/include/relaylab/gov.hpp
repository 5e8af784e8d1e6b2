// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <relaylab/crypto.hpp>
#include <relaylab/npos.hpp>

#include <map>
#include <optional>
#include <set>

namespace relaylab::gov {

enum class Bias { positive_turnout, simple_majority, negative_turnout };
enum class Origin { public_proposal, council_majority, council_unanimous, emergency };

Bias bias_for(Origin origin, bool unanimous_council = false);
const char* to_string(Bias b);
Bias parse_bias(std::string_view s);

// Lock classes: none, then 1x..6x with the lock period doubling per step.
enum class Conviction : uint8_t { none = 0, locked1, locked2, locked3, locked4, locked5, locked6 };

// Voting power in tenths of a stake unit: none = 1/10, lockedK = K.
uint64_t conviction_power_tenths(uint64_t stake, Conviction c);
Ratio conviction_power(uint64_t stake, Conviction c);
uint64_t lock_periods(Conviction c, uint64_t enactment_delay);

struct Ballot {
    std::string voter;
    uint64_t stake = 0;
    bool aye = true;
    Conviction conviction = Conviction::none;
};

struct TallyTotals {
    uint64_t aye_tenths = 0;
    uint64_t nay_tenths = 0;
    uint64_t turnout = 0; // raw stake
};

TallyTotals totals(std::span<const Ballot> ballots);

// aye, nay: conviction-weighted power (any common unit); turnout, electorate:
// raw stake.
//   positive: aye * sqrt(turnout) > nay * sqrt(electorate)
//   negative: aye * sqrt(electorate) > nay * sqrt(turnout)
//   simple  : aye > nay
// Zero turnout never approves. Evaluated exactly by squaring.
bool approves(Bias bias, uint64_t aye, uint64_t nay, uint64_t turnout, uint64_t electorate);
bool tally(std::span<const Ballot> ballots, uint64_t electorate, Bias bias);

using ProposalId = std::string;

struct Tabled {
    ProposalId id;
    Origin origin = Origin::public_proposal;
    std::map<std::string, uint64_t> released_deposits;
};

// Public proposals ordered by endorsement total; council proposals in
// submission order. Tabling alternates between the two queues.
class ProposalQueues {
public:
    void propose_public(const ProposalId& id, const std::string& proposer, uint64_t deposit);
    void endorse(const ProposalId& id, const std::string& who, uint64_t deposit);
    void propose_council(const ProposalId& id, Origin origin);

    std::optional<Tabled> step();

    bool public_empty() const { return public_.empty(); }
    bool council_empty() const { return council_.empty(); }
    std::optional<Origin> last_tabled() const { return last_; }

private:
    struct PublicProposal {
        ProposalId id;
        uint64_t order = 0;
        std::map<std::string, uint64_t> deposits;
        uint64_t endorsement() const;
    };
    std::vector<PublicProposal> public_;
    std::vector<std::pair<ProposalId, Origin>> council_;
    std::optional<Origin> last_;
    uint64_t next_order_ = 0;
};

enum class MotionStatus { queued, vetoed, rejected };

struct MotionOutcome {
    MotionStatus status = MotionStatus::rejected;
    Origin origin = Origin::council_majority;
    bool veto_rejected = false;
};

class Council {
public:
    explicit Council(size_t seats = 23, uint64_t veto_cooldown = 0) : seats_(seats), cooldown_(veto_cooldown) {}

    size_t seats() const noexcept { return seats_; }
    size_t majority() const noexcept { return seats_ / 2 + 1; }

    // ayes: number of members in favour; vetoes: members exercising a veto
    MotionOutcome process(const ProposalId& id, size_t ayes, const std::set<std::string>& vetoes, uint64_t now);

    // cancelling a live referendum needs every seat
    bool cancel(size_t ayes) const { return ayes == seats_; }

    bool veto_immune(const ProposalId& id) const { return immune_.contains(id); }

private:
    size_t seats_;
    uint64_t cooldown_;
    std::map<ProposalId, uint64_t> vetoed_until_;
    std::set<ProposalId> immune_;
};

struct EmergencyThresholds {
    size_t council_ayes = 0;
    size_t tc_ayes = 0;
};

EmergencyThresholds emergency_thresholds(size_t council_size, size_t tc_size);
bool emergency_table(size_t council_ayes, size_t council_size, size_t tc_ayes, size_t tc_size);

// Council of `seats` members elected by the stake-weighted approval election.
npos::ElectionResult elect_council(const npos::ElectionInstance& instance, size_t seats = 23);

// ---- candle auction ----

struct Period {
    uint8_t first = 1; // slots 1..4
    uint8_t last = 1;
    auto operator<=>(const Period&) const = default;
};

std::vector<Period> all_periods();
std::string to_string(Period p);

struct Bid {
    std::string bidder;
    Period period;
    uint64_t amount = 0;
    uint64_t time = 0; // ticks since the window opened
};

enum class BidVerdict { registered, not_highest, gap_rule, outside_window, bad_period };
const char* to_string(BidVerdict v);

class CandleAuction {
public:
    explicit CandleAuction(uint64_t window) : window_(window) {}

    // bids must arrive in nondecreasing time order
    BidVerdict place(const Bid& bid);

    const std::vector<Bid>& registered() const { return bids_; }
    uint64_t window() const { return window_; }

    // leader of each period counting only bids with time < cutoff
    std::map<Period, Bid> leaders(uint64_t cutoff) const;

private:
    uint64_t window_;
    std::vector<Bid> bids_;
};

uint64_t sample_close(const Digest& randomness, uint64_t window);

struct LeaseWin {
    std::string bidder;
    Period period;
    uint64_t locked = 0;
    uint8_t release_after_slot = 0;
};

// Maximises the summed amount over non-overlapping periods among the leaders
// at `close`; ties go to the first partition in enumeration order.
std::vector<LeaseWin> candle_close(const CandleAuction& auction, uint64_t close);

} // namespace relaylab::gov
