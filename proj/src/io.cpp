// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <relaylab/io.hpp>

#include "json_reader.hpp"

#include <fstream>
#include <sstream>

namespace relaylab::io {

using json_reader::bad;
using json_reader::Obj;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json parse(std::string_view text)
{
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        bad(std::string("malformed JSON: ") + e.what());
    }
}

std::vector<std::string> strings(const json& v, const std::string& where)
{
    if (!v.is_array())
        bad(where + ": expected an array of strings");
    std::vector<std::string> out;
    for (const auto& s : v) {
        if (!s.is_string())
            bad(where + ": expected an array of strings");
        out.push_back(s.get<std::string>());
    }
    return out;
}

const json& array_at(Obj& o, const std::string& k)
{
    const auto* v = o.get(k);
    if (!v || !v->is_array())
        bad(o.at(k) + ": expected an array");
    return *v;
}

} // namespace

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        bad("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

npos::ElectionInstance election_from_json(std::string_view text)
{
    auto j = parse(text);
    npos::ElectionInstance in;
    {
        Obj o(j, "instance");
        const auto* c = o.get("candidates");
        if (!c)
            bad("instance.candidates: missing");
        in.candidates = strings(*c, "instance.candidates");
        o.num("committee_size", in.committee_size);
        const auto& noms = array_at(o, "nominators");
        for (size_t i = 0; i < noms.size(); ++i) {
            npos::Nominator n;
            Obj no(noms[i], "instance.nominators[" + std::to_string(i) + "]");
            no.text("id", n.id);
            no.num("stake", n.stake);
            if (const auto* a = no.get("approvals"))
                n.approvals = strings(*a, no.at("approvals"));
            in.nominators.push_back(std::move(n));
        }
    }
    try {
        in.validate();
    } catch (const Error& e) {
        bad(e.what());
    }
    return in;
}

std::string election_to_json(const npos::ElectionInstance& in)
{
    ordered_json j;
    j["candidates"] = in.candidates;
    j["committee_size"] = in.committee_size;
    j["nominators"] = ordered_json::array();
    for (const auto& n : in.nominators)
        j["nominators"].push_back({{"id", n.id}, {"stake", n.stake}, {"approvals", n.approvals}});
    return j.dump(2) + "\n";
}

std::string result_to_json(const npos::ElectionResult& r, std::optional<bool> pjr)
{
    ordered_json j;
    j["committee"] = r.committee;
    ordered_json supports = ordered_json::object();
    for (const auto& [c, s] : r.supports())
        supports[c] = s;
    j["supports"] = supports;
    j["min_support"] = r.min_support();
    if (pjr)
        j["pjr"] = *pjr;
    else
        j["pjr"] = nullptr;
    j["distribution"] = ordered_json::array();
    for (const auto& [edge, amount] : r.distribution)
        j["distribution"].push_back({{"nominator", edge.first}, {"candidate", edge.second}, {"stake", amount}});
    return j.dump(2) + "\n";
}

std::string result_to_csv(const npos::ElectionResult& r)
{
    std::ostringstream out;
    out << "nominator,candidate,stake\n";
    for (const auto& [edge, amount] : r.distribution)
        out << edge.first << "," << edge.second << "," << amount << "\n";
    return out.str();
}

Referendum referendum_from_json(std::string_view text)
{
    auto j = parse(text);
    Referendum r;
    Obj o(j, "referendum");
    std::string bias = "simple";
    o.text("bias", bias);
    try {
        r.bias = gov::parse_bias(bias);
    } catch (const Error&) {
        bad(o.at("bias") + ": expected positive, simple or negative");
    }
    o.num("electorate", r.electorate);
    const auto& ballots = array_at(o, "ballots");
    uint64_t turnout = 0;
    for (size_t i = 0; i < ballots.size(); ++i) {
        gov::Ballot b;
        Obj bo(ballots[i], "referendum.ballots[" + std::to_string(i) + "]");
        bo.text("voter", b.voter);
        bo.num("stake", b.stake);
        bo.flag("aye", b.aye);
        uint32_t conviction = 0;
        bo.num("conviction", conviction);
        if (conviction > 6)
            bad(bo.at("conviction") + ": expected 0..6");
        b.conviction = static_cast<gov::Conviction>(conviction);
        turnout += b.stake;
        r.ballots.push_back(std::move(b));
    }
    if (turnout > r.electorate)
        bad("referendum: ballots exceed the electorate");
    return r;
}

std::string verdict_to_json(const Referendum& r, bool approved)
{
    auto t = gov::totals(r.ballots);
    ordered_json j;
    j["bias"] = gov::to_string(r.bias);
    j["approved"] = approved;
    j["aye_tenths"] = t.aye_tenths;
    j["nay_tenths"] = t.nay_tenths;
    j["turnout"] = t.turnout;
    j["electorate"] = r.electorate;
    return j.dump(2) + "\n";
}

std::string verdict_to_csv(const Referendum& r, bool approved)
{
    auto t = gov::totals(r.ballots);
    std::ostringstream out;
    out << "bias,approved,aye_tenths,nay_tenths,turnout,electorate\n"
        << gov::to_string(r.bias) << "," << (approved ? "true" : "false") << "," << t.aye_tenths << ","
        << t.nay_tenths << "," << t.turnout << "," << r.electorate << "\n";
    return out.str();
}

uint64_t Auction::close_time() const { return close ? *close : gov::sample_close(randomness, window); }

Auction auction_from_json(std::string_view text)
{
    auto j = parse(text);
    Auction a;
    Obj o(j, "auction");
    o.num("window", a.window);
    if (a.window == 0)
        bad("auction.window: must be positive");
    uint64_t close = 0;
    if (o.get("close")) {
        o.num("close", close);
        a.close = close;
    }
    std::string randomness;
    o.text("randomness", randomness);
    if (!randomness.empty()) {
        try {
            a.randomness = Digest::from_hex(randomness);
        } catch (const Error&) {
            bad(o.at("randomness") + ": expected 64 hex digits");
        }
    }
    const auto& bids = array_at(o, "bids");
    for (size_t i = 0; i < bids.size(); ++i) {
        gov::Bid b;
        Obj bo(bids[i], "auction.bids[" + std::to_string(i) + "]");
        bo.text("bidder", b.bidder);
        bo.num("first", b.period.first);
        bo.num("last", b.period.last);
        bo.num("amount", b.amount);
        bo.num("time", b.time);
        if (!a.bids.empty() && b.time < a.bids.back().time)
            bad(bo.at("time") + ": bids must be in time order");
        a.bids.push_back(std::move(b));
    }
    return a;
}

AuctionOutcome run_auction(const Auction& a)
{
    gov::CandleAuction auction(a.window);
    AuctionOutcome out;
    for (const auto& b : a.bids)
        out.verdicts.push_back(auction.place(b));
    out.close = a.close_time();
    out.winners = gov::candle_close(auction, out.close);
    return out;
}

std::string outcome_to_json(const AuctionOutcome& o)
{
    ordered_json j;
    j["close"] = o.close;
    j["verdicts"] = ordered_json::array();
    for (auto v : o.verdicts)
        j["verdicts"].push_back(gov::to_string(v));
    j["winners"] = ordered_json::array();
    for (const auto& w : o.winners)
        j["winners"].push_back({{"bidder", w.bidder},
                                {"period", gov::to_string(w.period)},
                                {"locked", w.locked},
                                {"release_after_slot", w.release_after_slot}});
    return j.dump(2) + "\n";
}

std::string outcome_to_csv(const AuctionOutcome& o)
{
    std::ostringstream out;
    out << "bidder,period,locked,release_after_slot\n";
    for (const auto& w : o.winners)
        out << w.bidder << "," << gov::to_string(w.period) << "," << w.locked << ","
            << static_cast<unsigned>(w.release_after_slot) << "\n";
    return out.str();
}

} // namespace relaylab::io
