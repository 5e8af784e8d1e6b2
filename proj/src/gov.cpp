// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <relaylab/gov.hpp>

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>

namespace relaylab::gov {

using boost::multiprecision::cpp_int;

Bias bias_for(Origin origin, bool unanimous_council)
{
    switch (origin) {
    case Origin::public_proposal:
        return Bias::positive_turnout;
    case Origin::council_majority:
        return Bias::simple_majority;
    case Origin::council_unanimous:
        return Bias::negative_turnout;
    case Origin::emergency:
        return unanimous_council ? Bias::negative_turnout : Bias::simple_majority;
    }
    return Bias::simple_majority;
}

const char* to_string(Bias b)
{
    switch (b) {
    case Bias::positive_turnout:
        return "positive";
    case Bias::simple_majority:
        return "simple";
    case Bias::negative_turnout:
        return "negative";
    }
    return "?";
}

Bias parse_bias(std::string_view s)
{
    if (s == "positive")
        return Bias::positive_turnout;
    if (s == "simple")
        return Bias::simple_majority;
    if (s == "negative")
        return Bias::negative_turnout;
    throw Error(ErrorKind::config, "unknown bias '" + std::string(s) + "'");
}

uint64_t conviction_power_tenths(uint64_t stake, Conviction c)
{
    auto k = static_cast<uint64_t>(c);
    return k == 0 ? stake : stake * 10 * k;
}

Ratio conviction_power(uint64_t stake, Conviction c) { return {conviction_power_tenths(stake, c), 10}; }

uint64_t lock_periods(Conviction c, uint64_t enactment_delay)
{
    auto k = static_cast<uint64_t>(c);
    return k == 0 ? 0 : enactment_delay << (k - 1);
}

TallyTotals totals(std::span<const Ballot> ballots)
{
    TallyTotals t;
    for (const auto& b : ballots) {
        (b.aye ? t.aye_tenths : t.nay_tenths) += conviction_power_tenths(b.stake, b.conviction);
        t.turnout += b.stake;
    }
    return t;
}

bool approves(Bias bias, uint64_t aye, uint64_t nay, uint64_t turnout, uint64_t electorate)
{
    if (turnout == 0)
        return false;
    if (turnout > electorate)
        throw Error(ErrorKind::config, "turnout exceeds electorate");
    cpp_int a2 = cpp_int(aye) * aye;
    cpp_int n2 = cpp_int(nay) * nay;
    switch (bias) {
    case Bias::positive_turnout:
        return a2 * turnout > n2 * electorate;
    case Bias::negative_turnout:
        return a2 * electorate > n2 * turnout;
    case Bias::simple_majority:
        return aye > nay;
    }
    return false;
}

bool tally(std::span<const Ballot> ballots, uint64_t electorate, Bias bias)
{
    auto t = totals(ballots);
    return approves(bias, t.aye_tenths, t.nay_tenths, t.turnout, electorate);
}

uint64_t ProposalQueues::PublicProposal::endorsement() const
{
    uint64_t s = 0;
    for (const auto& [_, d] : deposits)
        s += d;
    return s;
}

void ProposalQueues::propose_public(const ProposalId& id, const std::string& proposer, uint64_t deposit)
{
    for (const auto& p : public_)
        if (p.id == id)
            throw Error(ErrorKind::rejected, "duplicate proposal " + id);
    public_.push_back({id, next_order_++, {{proposer, deposit}}});
}

void ProposalQueues::endorse(const ProposalId& id, const std::string& who, uint64_t deposit)
{
    for (auto& p : public_)
        if (p.id == id) {
            p.deposits[who] += deposit;
            return;
        }
    throw Error(ErrorKind::key_absent, "no public proposal " + id);
}

void ProposalQueues::propose_council(const ProposalId& id, Origin origin) { council_.emplace_back(id, origin); }

std::optional<Tabled> ProposalQueues::step()
{
    bool take_public;
    if (public_.empty() && council_.empty())
        return std::nullopt;
    if (public_.empty())
        take_public = false;
    else if (council_.empty())
        take_public = true;
    else
        take_public = !(last_ && *last_ == Origin::public_proposal);

    Tabled t;
    if (take_public) {
        auto best = std::max_element(public_.begin(), public_.end(), [](const auto& a, const auto& b) {
            if (a.endorsement() != b.endorsement())
                return a.endorsement() < b.endorsement();
            return a.order > b.order; // earlier proposal wins ties
        });
        t.id = best->id;
        t.origin = Origin::public_proposal;
        t.released_deposits = best->deposits;
        public_.erase(best);
    } else {
        t.id = council_.front().first;
        t.origin = council_.front().second;
        council_.erase(council_.begin());
    }
    last_ = t.origin == Origin::public_proposal ? Origin::public_proposal : Origin::council_majority;
    return t;
}

MotionOutcome Council::process(const ProposalId& id, size_t ayes, const std::set<std::string>& vetoes, uint64_t now)
{
    MotionOutcome out;
    if (ayes > seats_)
        throw Error(ErrorKind::config, "more ayes than seats");
    auto cool = vetoed_until_.find(id);
    const bool second_attempt = cool != vetoed_until_.end();
    if (second_attempt && now < cool->second) {
        out.status = MotionStatus::rejected;
        return out;
    }
    if (ayes < majority()) {
        out.status = MotionStatus::rejected;
        return out;
    }
    if (!vetoes.empty()) {
        if (!second_attempt) {
            vetoed_until_[id] = now + cooldown_;
            out.status = MotionStatus::vetoed;
            return out;
        }
        out.veto_rejected = true;
    }
    if (second_attempt)
        immune_.insert(id);
    out.status = MotionStatus::queued;
    out.origin = ayes == seats_ ? Origin::council_unanimous : Origin::council_majority;
    return out;
}

EmergencyThresholds emergency_thresholds(size_t council_size, size_t tc_size)
{
    return {(3 * council_size + 3) / 4, (2 * tc_size + 2) / 3};
}

bool emergency_table(size_t council_ayes, size_t council_size, size_t tc_ayes, size_t tc_size)
{
    auto t = emergency_thresholds(council_size, tc_size);
    return council_ayes >= t.council_ayes && tc_ayes >= t.tc_ayes;
}

npos::ElectionResult elect_council(const npos::ElectionInstance& instance, size_t seats)
{
    auto in = instance;
    in.committee_size = seats;
    return npos::elect(in);
}

std::vector<Period> all_periods()
{
    std::vector<Period> out;
    for (uint8_t a = 1; a <= 4; ++a)
        for (uint8_t b = a; b <= 4; ++b)
            out.push_back({a, b});
    return out;
}

std::string to_string(Period p)
{
    std::string s = "(";
    for (uint8_t i = p.first; i <= p.last; ++i) {
        if (i != p.first)
            s += ",";
        s += std::to_string(i);
    }
    return s + ")";
}

const char* to_string(BidVerdict v)
{
    switch (v) {
    case BidVerdict::registered:
        return "registered";
    case BidVerdict::not_highest:
        return "not-highest";
    case BidVerdict::gap_rule:
        return "gap-rule";
    case BidVerdict::outside_window:
        return "outside-window";
    case BidVerdict::bad_period:
        return "bad-period";
    }
    return "?";
}

std::map<Period, Bid> CandleAuction::leaders(uint64_t cutoff) const
{
    std::map<Period, Bid> out;
    for (const auto& b : bids_) {
        if (b.time >= cutoff)
            break;
        out[b.period] = b; // each registered bid beats the previous leader
    }
    return out;
}

namespace {

bool contiguous_union(const std::vector<Period>& ps)
{
    if (ps.empty())
        return true;
    bool covered[6] = {};
    for (const auto& p : ps)
        for (int s = p.first; s <= p.last; ++s)
            covered[s] = true;
    int lo = 5, hi = 0;
    for (int s = 1; s <= 4; ++s)
        if (covered[s]) {
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
    for (int s = lo; s <= hi; ++s)
        if (!covered[s])
            return false;
    return true;
}

} // namespace

BidVerdict CandleAuction::place(const Bid& bid)
{
    if (bid.period.first < 1 || bid.period.last > 4 || bid.period.first > bid.period.last)
        return BidVerdict::bad_period;
    if (bid.time >= window_)
        return BidVerdict::outside_window;
    if (!bids_.empty() && bid.time < bids_.back().time)
        throw Error(ErrorKind::config, "bids must be placed in time order");
    auto now = leaders(UINT64_MAX);
    auto it = now.find(bid.period);
    if (it != now.end() && bid.amount <= it->second.amount)
        return BidVerdict::not_highest;
    std::vector<Period> held{bid.period};
    for (const auto& [p, b] : now)
        if (b.bidder == bid.bidder && p != bid.period)
            held.push_back(p);
    if (!contiguous_union(held))
        return BidVerdict::gap_rule;
    bids_.push_back(bid);
    return BidVerdict::registered;
}

uint64_t sample_close(const Digest& randomness, uint64_t window)
{
    if (window == 0)
        throw Error(ErrorKind::config, "empty auction window");
    auto h = hash({as_view("candle"), randomness.view()});
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v = (v << 8) | h.bytes[i];
    return v % window;
}

std::vector<LeaseWin> candle_close(const CandleAuction& auction, uint64_t close)
{
    auto lead = auction.leaders(close);
    // every way to cut slots 1..4 into contiguous ranges: 3 cut points, 8 partitions
    std::vector<LeaseWin> best;
    uint64_t best_value = 0;
    bool have = false;
    for (int cuts = 0; cuts < 8; ++cuts) {
        std::vector<Period> parts;
        uint8_t start = 1;
        for (uint8_t s = 1; s <= 4; ++s)
            if (s == 4 || (cuts & (1 << (s - 1)))) {
                parts.push_back({start, s});
                start = static_cast<uint8_t>(s + 1);
            }
        uint64_t value = 0;
        std::vector<LeaseWin> wins;
        for (const auto& p : parts) {
            auto it = lead.find(p);
            if (it == lead.end())
                continue;
            value += it->second.amount;
            wins.push_back({it->second.bidder, p, it->second.amount, p.last});
        }
        if (!have || value > best_value) {
            best = std::move(wins);
            best_value = value;
            have = true;
        }
    }
    return best;
}

} // namespace relaylab::gov
