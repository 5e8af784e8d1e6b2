// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// JSON readers and writers for the standalone solver inputs. Readers reject
// unknown keys and malformed values with ErrorKind::config.

#include <relaylab/gov.hpp>
#include <relaylab/npos.hpp>

#include <string>

namespace relaylab::io {

std::string read_file(const std::string& path); // throws config

// {nominators: [{id, stake, approvals}], candidates, committee_size}
npos::ElectionInstance election_from_json(std::string_view text);
std::string election_to_json(const npos::ElectionInstance& instance);
std::string result_to_json(const npos::ElectionResult& result, std::optional<bool> pjr); // null pjr: not checked
std::string result_to_csv(const npos::ElectionResult& result);

// {bias, electorate, ballots: [{voter, stake, aye, conviction 0..6}]}
struct Referendum {
    gov::Bias bias = gov::Bias::simple_majority;
    uint64_t electorate = 0;
    std::vector<gov::Ballot> ballots;
};
Referendum referendum_from_json(std::string_view text);
std::string verdict_to_json(const Referendum& r, bool approved);
std::string verdict_to_csv(const Referendum& r, bool approved);

// {window, close | randomness (hex), bids: [{bidder, first, last, amount, time}]}
struct Auction {
    uint64_t window = 0;
    std::optional<uint64_t> close;
    Digest randomness;
    std::vector<gov::Bid> bids;

    uint64_t close_time() const;
};
Auction auction_from_json(std::string_view text);

struct AuctionOutcome {
    uint64_t close = 0;
    std::vector<gov::BidVerdict> verdicts;
    std::vector<gov::LeaseWin> winners;
};
AuctionOutcome run_auction(const Auction& a);
std::string outcome_to_json(const AuctionOutcome& o);
std::string outcome_to_csv(const AuctionOutcome& o);

} // namespace relaylab::io
