// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "suites.hpp"

#include <relaylab/erasure.hpp>
#include <relaylab/grandpa.hpp>
#include <relaylab/io.hpp>
#include <relaylab/sim.hpp>
#include <relaylab/trie.hpp>
#include <relaylab/xcmp.hpp>

#include "npos_oracle.hpp"

#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace relaylab::suites {

namespace fs = std::filesystem;
using sim::MetricsReport;
using sim::ScenarioConfig;

std::string root()
{
    if (const char* r = std::getenv("RELAYLAB_ROOT"); r && *r)
        return r;
    return RELAYLAB_SOURCE_DIR;
}

bool configure_logging()
{
    const char* v = std::getenv("SIM_LOG");
    auto level = spdlog::level::warn;
    if (v && *v) {
        level = spdlog::level::from_str(v);
        // from_str maps anything unknown to off
        if (level == spdlog::level::off && std::string_view(v) != "off")
            return false;
    }
    spdlog::set_default_logger(spdlog::stderr_logger_mt("relaylab"));
    spdlog::set_level(level);
    spdlog::set_pattern("[%l] %v");
    return true;
}

namespace {

std::string str(const std::ostringstream& o) { return o.str(); }

ScenarioConfig load(const std::string& path) { return ScenarioConfig::from_json(io::read_file(path)); }

std::vector<fs::path> catalog()
{
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(root() + "/scenarios"))
        if (e.path().extension() == ".json")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    return files;
}

constexpr uint64_t catalog_seeds = 5;

struct CatalogRun {
    std::string scenario;
    ScenarioConfig config;
    MetricsReport report;
};

// every catalog scenario under seeds 1..catalog_seeds, computed once
const std::vector<CatalogRun>& catalog_runs()
{
    static const std::vector<CatalogRun> runs = [] {
        std::vector<CatalogRun> out;
        for (const auto& f : catalog()) {
            auto c = load(f.string());
            for (uint64_t s = 1; s <= catalog_seeds; ++s) {
                c.seed = s;
                spdlog::debug("catalog {} seed {}", c.name, s);
                out.push_back({c.name, c, sim::run(c)});
            }
        }
        return out;
    }();
    return runs;
}

// ---- 1
Outcome inflation()
{
    auto c = load(root() + "/scenarios/economy-year.json");
    const auto& p = c.economics.issuance;
    auto r = sim::run(c);
    // yearly mint is target staking rate times ideal interest of the year-start supply
    auto scheduled = static_cast<uint64_t>(static_cast<unsigned __int128>(r.supply_start) * p.target_staking.num *
                                           p.ideal_interest.num / (p.target_staking.den * p.ideal_interest.den));
    bool ten_percent = p.target_staking.num * p.ideal_interest.num * 10 == p.target_staking.den * p.ideal_interest.den;
    bool year = r.eras == p.eras_per_year;
    uint64_t diff = r.minted > scheduled ? r.minted - scheduled : scheduled - r.minted;
    std::ostringstream o;
    o << "eras " << r.eras << "/" << p.eras_per_year << ", supply " << r.supply_start << ", minted " << r.minted
      << ", 10% = " << r.supply_start / 10 << " (diff " << diff << ")";
    return {ten_percent && year && diff <= 1 && r.supply_start / 10 == scheduled, str(o)};
}

// ---- 2
Outcome ghost_figure()
{
    // genesis - child; child - left (with left-child) and right
    babe::BlockTree tree(babe::make_genesis({}));
    std::vector<Digest> h{tree.genesis().hash()};
    auto add = [&](size_t parent) {
        babe::Block b;
        b.header.parent = h[parent];
        b.header.number = tree.at(h[parent]).number() + 1;
        b.header.slot = h.size();
        b.hash = b.header.hash();
        h.push_back(tree.insert(std::make_shared<const babe::Block>(std::move(b))).hash());
        return h.size() - 1;
    };
    auto child = add(0);
    auto left = add(child), right = add(child);
    auto left_child = add(left);

    crypto::KeyRegistry reg;
    std::vector<crypto::KeyPair> keys;
    std::vector<crypto::PublicKey> pubs;
    for (int i = 0; i < 10; ++i) {
        keys.push_back(reg.generate("voter-" + std::to_string(i)));
        pubs.push_back(keys.back().public_key);
    }
    auto voters = grandpa::VoterSet::equal(pubs);
    grandpa::VoteSet votes(1, grandpa::Stage::prevote, voters);
    for (grandpa::VoterId v = 0; v < 10; ++v) {
        auto target = v < 4 ? left_child : (v < 6 ? left : right);
        votes.add(grandpa::sign_vote(1, grandpa::Stage::prevote, h[target], tree.at(h[target]).number(), v,
                                     keys[v].secret));
    }
    auto w = [&](size_t b) { return grandpa::descendant_weight(votes, tree, h[b]); };
    auto g = grandpa::ghost_2_3(votes, tree, h[0]);
    std::ostringstream o;
    o << "weights child " << w(child) * 10 << "%, left " << w(left) * 10 << "%, right " << w(right) * 10
      << "%; g(V) = " << (g == h[child] ? "child" : g == h[left] ? "left" : g == h[0] ? "genesis" : "other");
    return {g == h[child] && w(child) == 10 && w(left) == 6 && w(right) == 4, str(o)};
}

// ---- 3
Outcome grandpa_safety()
{
    constexpr uint32_t sizes[] = {4, 7, 10, 13, 16};
    uint64_t conflicts = 0, alarms = 0, finalized = 0, equivocations = 0, max_share_pm = 0;
    size_t dirty = 0;
    for (uint64_t i = 0; i < 1000; ++i) {
        ScenarioConfig c;
        c.name = "grandpa-safety";
        c.seed = i + 1;
        c.validators = sizes[i % 5];
        c.adversary.count = c.validators * 32 / 100;
        c.adversary.scripts = {sim::Script::equivocate, sim::Script::delay_maximal, sim::Script::censor};
        c.slots = 120;
        auto r = sim::run(c);
        conflicts += r.safety.conflicts;
        alarms += r.safety_alarms;
        finalized += r.finalized_height;
        equivocations += r.block_equivocations + r.vote_equivocations;
        max_share_pm = std::max<uint64_t>(max_share_pm, 1000 * c.adversary.count / c.validators);
        dirty += r.safety.conflicts > 0;
        if ((i + 1) % 100 == 0)
            spdlog::debug("grandpa-safety {}/1000", i + 1);
    }
    std::ostringstream o;
    o << "1000 runs, n in {4,7,10,13,16}, max adversarial weight " << max_share_pm / 10.0 << "%, "
      << equivocations << " equivocations, mean finalized height " << finalized / 1000 << ", conflicts "
      << conflicts << " (" << dirty << " runs), alarms " << alarms;
    return {conflicts == 0 && max_share_pm <= 320 && finalized > 0, str(o)};
}

// ---- 4
Outcome accountable_safety()
{
    auto base = load(root() + "/scenarios/split-brain.json");
    struct Shape {
        uint32_t n, f;
    };
    size_t runs = 0, conflicting = 0, accountable = 0;
    uint64_t min_share_pm = 1000;
    for (auto [n, f] : {Shape{10, 4}, Shape{13, 5}, Shape{7, 3}}) {
        for (uint64_t s = 1; s <= 20; ++s) {
            auto c = base;
            c.validators = n;
            c.adversary.count = f;
            c.seed = s;
            auto r = sim::run(c);
            ++runs;
            if (r.safety.conflicts == 0)
                continue;
            ++conflicting;
            std::set<uint32_t> adv(r.adversaries.begin(), r.adversaries.end());
            bool inside = std::all_of(r.safety.culprits.begin(), r.safety.culprits.end(),
                                      [&](uint32_t v) { return adv.contains(v); });
            bool third = 3 * r.safety.culprit_weight >= r.safety.total_weight;
            if (r.safety.detected && third && inside)
                ++accountable;
            if (r.safety.total_weight)
                min_share_pm = std::min<uint64_t>(min_share_pm, 1000 * r.safety.culprit_weight / r.safety.total_weight);
        }
    }
    std::ostringstream o;
    o << runs << " split-brain runs, " << conflicting << " with conflicting finality, " << accountable
      << " accountable; smallest culprit share " << min_share_pm / 10.0 << "%";
    return {conflicting > 0 && accountable == conflicting, str(o)};
}

// ---- 5
Outcome npos_pjr()
{
    size_t count = 0, pjr = 0, conserved = 0, approx = 0;
    std::string first_failure;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(root() + "/data/npos-instances"))
        if (e.path().extension() == ".json")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        auto in = io::election_from_json(io::read_file(f.string()));
        auto r = npos::elect(in);
        ++count;
        bool ok_pjr = npos::check_pjr(in, r.committee);
        std::set<npos::CandidateId> elected(r.committee.begin(), r.committee.end());
        bool ok_cons = r.committee.size() == in.committee_size;
        for (const auto& n : in.nominators) {
            uint64_t sum = 0;
            for (const auto& [key, amount] : r.distribution)
                if (key.first == n.id)
                    sum += amount;
            bool backs = std::any_of(n.approvals.begin(), n.approvals.end(), [&](const auto& a) { return elected.contains(a); });
            ok_cons = ok_cons && sum == (backs ? n.stake : 0);
        }
        for (const auto& [key, amount] : r.distribution) {
            const auto& [nom, cand] = key;
            auto it = std::find_if(in.nominators.begin(), in.nominators.end(), [&](const auto& n) { return n.id == nom; });
            ok_cons = ok_cons && it != in.nominators.end() && elected.contains(cand) &&
                      std::find(it->approvals.begin(), it->approvals.end(), cand) != it->approvals.end();
        }
        auto best = npos::oracle::best_maximin(in);
        bool ok_half = 2 * static_cast<unsigned __int128>(r.min_support()) * best.den >= best.num;
        pjr += ok_pjr;
        conserved += ok_cons;
        approx += ok_half;
        if (!(ok_pjr && ok_cons && ok_half) && first_failure.empty())
            first_failure = f.filename().string();
    }
    std::ostringstream o;
    o << count << " instances: PJR " << pjr << ", conservation " << conserved << ", min support >= half optimum "
      << approx;
    if (!first_failure.empty())
        o << "; first failure " << first_failure;
    return {count > 0 && pjr == count && conserved == count && approx == count, str(o)};
}

// ---- 6
Outcome erasure_threshold()
{
    std::mt19937_64 rng(20260);
    size_t good = 0, short_failed = 0, checks = 0, short_checks = 0;
    auto blob_for = [&](size_t n) {
        Bytes b(50 + rng() % (40 * n));
        for (auto& x : b)
            x = static_cast<uint8_t>(rng());
        return b;
    };
    auto try_subset = [&](const erasure::ErasurePieces& enc, const std::vector<size_t>& idx, const Bytes& blob) {
        std::vector<erasure::Piece> sub;
        for (auto i : idx)
            sub.push_back(enc.pieces[i]);
        try {
            return erasure::reconstruct(sub, enc.n, enc.root) == blob;
        } catch (const Error&) {
            return false;
        }
    };
    auto each_subset = [](size_t n, size_t k, const auto& fn) {
        std::vector<bool> pick(n, false);
        std::fill(pick.begin(), pick.begin() + static_cast<ptrdiff_t>(k), true);
        do {
            std::vector<size_t> idx;
            for (size_t i = 0; i < n; ++i)
                if (pick[i])
                    idx.push_back(i);
            fn(idx);
        } while (std::prev_permutation(pick.begin(), pick.end()));
    };
    auto sample = [&](size_t n, size_t k) {
        std::vector<size_t> all(n);
        std::iota(all.begin(), all.end(), 0);
        std::shuffle(all.begin(), all.end(), rng);
        all.resize(k);
        return all;
    };
    for (size_t n = 4; n <= 50; ++n) {
        auto blob = blob_for(n);
        auto enc = erasure::encode(blob, n);
        auto k = erasure::threshold(n);
        auto full = [&](const std::vector<size_t>& idx) {
            ++checks;
            good += try_subset(enc, idx, blob);
        };
        auto partial = [&](const std::vector<size_t>& idx) {
            ++short_checks;
            short_failed += !try_subset(enc, idx, blob);
        };
        if (n <= 12) {
            each_subset(n, k, full);
            each_subset(n, k - 1, partial);
        } else {
            for (int i = 0; i < 200; ++i) {
                full(sample(n, k));
                partial(sample(n, k - 1));
            }
        }
    }
    std::ostringstream o;
    o << "N 4..12 exhaustive, 13..50 sampled: " << good << "/" << checks << " threshold subsets reconstruct, "
      << short_failed << "/" << short_checks << " smaller subsets fail";
    return {good == checks && short_failed == short_checks, str(o)};
}

// ---- 7
Outcome availability()
{
    size_t runs = 0, with_invalid = 0, finalized_invalid_runs = 0, slashed_enough = 0, honest_breaches = 0;
    for (const auto& cr : catalog_runs()) {
        const auto& r = cr.report;
        ++runs;
        with_invalid += r.invalid_included > 0;
        honest_breaches += r.invalid_finalized_with_honest_checker > 0;
        if (r.invalid_finalized == 0)
            continue;
        ++finalized_invalid_runs;
        uint64_t slashed = 0;
        for (const auto& s : r.slashes)
            if (s.reason == "invalid candidate")
                slashed += s.amount;
        if (slashed >= static_cast<uint64_t>(r.attestation_threshold) * r.min_attester_support)
            ++slashed_enough;
    }
    std::ostringstream o;
    o << runs << " catalog runs, " << with_invalid << " with invalid candidates included, " << honest_breaches
      << " finalized invalid with an honest checker; " << finalized_invalid_runs << " finalized-invalid runs, "
      << slashed_enough << " slashed >= threshold x attester stake";
    return {honest_breaches == 0 && with_invalid > 0 && finalized_invalid_runs > 0 &&
                slashed_enough == finalized_invalid_runs,
            str(o)};
}

// ---- 8
Outcome xcmp_properties()
{
    uint64_t violations = 0, delivered = 0, reorg_runs = 0;
    for (const auto& cr : catalog_runs()) {
        const auto& r = cr.report;
        violations += r.xcmp_fifo_violations + r.xcmp_batch_violations + r.xcmp_watermark_violations +
                      r.xcmp_fork_violations;
        delivered += r.xcmp_delivered;
        reorg_runs += r.xcmp_delivered > 0 && (r.fork_blocks > 0 || r.reverted_blocks > 0);
    }
    // same runs with and without the finality stall
    auto stalled = load(root() + "/scenarios/finality-stall.json");
    auto free = stalled;
    free.adversary.scripts.clear();
    uint64_t worst_gap = 0, lag_stalled = 0, lag_free = 0, compared = 0;
    for (uint64_t s = 1; s <= 5; ++s) {
        stalled.seed = free.seed = s;
        auto a = sim::run(stalled), b = sim::run(free);
        violations += a.xcmp_fifo_violations + a.xcmp_batch_violations + a.xcmp_watermark_violations +
                      a.xcmp_fork_violations;
        if (a.xcmp_latency.count == 0 || b.xcmp_latency.count == 0)
            continue;
        ++compared;
        auto gap = [](uint64_t x, uint64_t y) { return x > y ? x - y : y - x; };
        worst_gap = std::max({worst_gap, gap(a.xcmp_latency.mean_milli, b.xcmp_latency.mean_milli),
                              1000 * gap(a.xcmp_latency.p95, b.xcmp_latency.p95)});
        lag_stalled = std::max(lag_stalled, a.finality_lag.max);
        lag_free = std::max(lag_free, b.finality_lag.max);
    }
    std::ostringstream o;
    o << "catalog: " << delivered << " messages, " << violations << " ordering/batch/watermark/fork violations, "
      << reorg_runs << " runs with reorgs; stalled vs free latency differs by at most " << worst_gap / 1000.0
      << " blocks (max finality lag " << lag_stalled << " vs " << lag_free << " slots)";
    return {violations == 0 && delivered > 0 && reorg_runs > 0 && compared == 5 && worst_gap <= 1000 &&
                lag_stalled > lag_free,
            str(o)};
}

// ---- 9
Outcome babe_properties()
{
    auto c = load(root() + "/scenarios/babe-desk.json");
    size_t runs = 0, cp_ok = 0, primary_ok = 0, growth_ok = 0;
    uint64_t min_growth = UINT64_MAX;
    for (uint64_t s = 1; s <= 200; ++s) {
        c.seed = s;
        auto r = sim::run(c);
        ++runs;
        cp_ok += r.common_prefix_violations == 0;
        primary_ok += r.epochs > 0 && r.epochs_without_honest_primary == 0;
        growth_ok += r.min_window_growth >= c.growth_floor;
        min_growth = std::min(min_growth, r.min_window_growth);
        if (s % 50 == 0)
            spdlog::debug("babe-properties {}/200", s);
    }
    std::ostringstream o;
    o << runs << " runs x " << c.slots << " slots, " << c.adversary.count << "/" << c.validators
      << " adversarial: k=" << c.common_prefix_depth << " common prefix in " << cp_ok << ", honest primary every epoch in "
      << primary_ok << ", growth floor " << c.growth_floor << " in " << growth_ok << " (min " << min_growth << ")";
    return {100 * cp_ok >= 99 * runs && primary_ok == runs && growth_ok == runs && c.growth_floor > 0, str(o)};
}

// ---- 10
Outcome relative_time()
{
    auto c = load(root() + "/scenarios/clock-drift.json");
    uint64_t worst = 0;
    size_t runs = 0, ok = 0;
    for (uint64_t s = 1; s <= 50; ++s) {
        c.seed = s;
        auto r = sim::run(c);
        ++runs;
        worst = std::max(worst, r.max_sync_spread);
        ok += r.sync_epochs > 0 && r.max_sync_spread <= c.delta + 1;
    }
    std::ostringstream o;
    o << runs << " seeds, honest drift " << c.clock.max_drift_ppm << " ppm, " << c.adversary.count
      << " adversaries at " << c.adversary.drift_ppm << " ppm: worst spread " << worst << " ticks (bound "
      << c.delta + 1 << ")";
    return {ok == runs, str(o)};
}

// ---- 11
Outcome governance()
{
    using gov::Bias;
    constexpr Bias biases[] = {Bias::positive_turnout, Bias::simple_majority, Bias::negative_turnout};
    size_t full_bad = 0, mono_bad = 0, emergency_bad = 0;
    for (uint64_t e : {1u, 2u, 7u, 100u, 1000u})
        for (uint64_t aye = 0; aye <= e; ++aye)
            for (auto b : biases)
                full_bad += gov::approves(b, aye, e - aye, e, e) != (aye > e - aye);
    // rising turnout at a fixed aye share never turns approval into rejection
    for (uint64_t share = 0; share <= 100; ++share) {
        bool seen = false;
        for (uint64_t t = 1; t <= 1000; ++t) {
            bool ok = gov::approves(Bias::positive_turnout, t * share, t * (100 - share), t, 1000);
            mono_bad += seen && !ok;
            seen |= ok;
        }
    }
    // 60:40 at 25% turnout of 1000
    auto pos = [](double aye, double nay, double t, double e) { return nay / std::sqrt(t) < aye / std::sqrt(e); };
    auto neg = [](double aye, double nay, double t, double e) { return nay / std::sqrt(e) < aye / std::sqrt(t); };
    bool fixture = !gov::approves(Bias::positive_turnout, 150, 100, 250, 1000) && !pos(150, 100, 250, 1000) &&
                   gov::approves(Bias::negative_turnout, 150, 100, 250, 1000) && neg(150, 100, 250, 1000);
    for (size_t tc = 1; tc <= 30; ++tc) {
        auto t = gov::emergency_thresholds(23, tc);
        emergency_bad += t.council_ayes != 18 || t.tc_ayes != (2 * tc + 2) / 3;
        for (size_t ca = 0; ca <= 23; ++ca)
            for (size_t ta = 0; ta <= tc; ++ta)
                emergency_bad += gov::emergency_table(ca, 23, ta, tc) != (ca >= 18 && 3 * ta >= 2 * tc);
    }
    std::ostringstream o;
    o << "full-turnout mismatches " << full_bad << ", monotonicity counterexamples " << mono_bad
      << ", 60:40 at 25% " << (fixture ? "rejected positive / approved negative" : "mismatch")
      << ", emergency mismatches " << emergency_bad;
    return {full_bad == 0 && mono_bad == 0 && fixture && emergency_bad == 0, str(o)};
}

// ---- 12
Outcome candle_auction()
{
    using gov::BidVerdict;
    using gov::CandleAuction;
    bool fixtures = true;
    {
        // winner of (1,2) may not bid on (4) alone, but may on (3,4)
        CandleAuction a(1000);
        fixtures &= a.place({"w", {1, 2}, 100, 0}) == BidVerdict::registered;
        fixtures &= a.place({"w", {4, 4}, 10, 1}) == BidVerdict::gap_rule;
        fixtures &= a.place({"w", {3, 4}, 10, 2}) == BidVerdict::registered;
        auto win = gov::candle_close(a, 1000);
        fixtures &= win.size() == 2 && win[0].bidder == "w" && win[1].bidder == "w";
    }
    {
        CandleAuction a(1000);
        a.place({"early", {1, 2}, 100, 200});
        a.place({"late", {1, 2}, 120, 800});
        auto before = gov::candle_close(a, 500), after = gov::candle_close(a, 900);
        fixtures &= before.size() == 1 && before[0].bidder == "early" && after.size() == 1 && after[0].bidder == "late";
    }
    {
        CandleAuction a(100);
        a.place({"whole", {1, 4}, 100, 0});
        a.place({"front", {1, 2}, 60, 1});
        a.place({"back", {3, 4}, 50, 2});
        auto late = gov::candle_close(a, 100), early = gov::candle_close(a, 2);
        fixtures &= late.size() == 2 && late[0].bidder == "front" && late[1].bidder == "back" && early.size() == 1 &&
                    early[0].bidder == "whole";
    }
    std::mt19937_64 rng(12);
    auto periods = gov::all_periods();
    size_t changed = 0;
    for (int iter = 0; iter < 1000; ++iter) {
        CandleAuction full(1000);
        uint64_t t = 0;
        for (int b = 0; b < 30; ++b) {
            t += rng() % 60;
            if (t >= 1000)
                break;
            (void)full.place({"b" + std::to_string(rng() % 6), periods[rng() % periods.size()], 1 + rng() % 500, t});
        }
        auto close = gov::sample_close(hash(ByteWriter().str("auction").u64(static_cast<uint64_t>(iter)).bytes()), 1000);
        CandleAuction trimmed(1000);
        for (const auto& b : full.registered())
            if (b.time < close)
                (void)trimmed.place(b);
        auto a = gov::candle_close(full, close), b = gov::candle_close(trimmed, close);
        bool same = a.size() == b.size();
        for (size_t i = 0; same && i < a.size(); ++i)
            same = a[i].bidder == b[i].bidder && a[i].period == b[i].period && a[i].locked == b[i].locked;
        changed += !same;
    }
    std::ostringstream o;
    o << "fixtures " << (fixtures ? "match" : "differ") << "; post-close bids changed winners in " << changed
      << " of 1000 random auctions";
    return {fixtures && changed == 0, str(o)};
}

// ---- 13
bool goldens(std::string& which)
{
    using nlohmann::json;
    auto doc = [](const std::string& name) { return json::parse(io::read_file(root() + "/tests/data/" + name)); };
    for (const auto& fx : doc("trie_golden.json")) {
        trie::StateTrie t;
        for (const auto& p : fx["pairs"])
            t = t.insert(from_hex(p["key"].get<std::string>()), from_hex(p["value"].get<std::string>()));
        if (t.root().hex() != fx["root"].get<std::string>()) {
            which = "trie " + fx["name"].get<std::string>();
            return false;
        }
    }
    {
        auto er = doc("babe_golden.json")["epoch_randomness"];
        babe::EpochParams p;
        p.length = er["epoch_length"];
        p.genesis_randomness = hash(as_view("genesis"));
        babe::BlockTree t(babe::make_genesis({}));
        const babe::TreeEntry* cur = &t.genesis();
        int i = 0;
        for (const auto& b : er["blocks"]) {
            babe::Block blk;
            blk.header.parent = cur->hash();
            blk.header.number = cur->number() + 1;
            blk.header.slot = b["slot"];
            blk.header.claim = b["primary"].get<bool>() ? babe::Claim::primary : babe::Claim::secondary;
            blk.header.vrf.value = Digest::from_hex(b["vrf"].get<std::string>());
            blk.header.state_root = hash(as_view(std::to_string(i++)));
            blk.hash = blk.header.hash();
            cur = &t.insert(std::make_shared<const babe::Block>(std::move(blk)));
        }
        for (const auto& [m, r] : er["randomness"].items())
            if (t.randomness_for(*cur, std::stoull(m), p).hex() != r.get<std::string>()) {
                which = "epoch randomness " + m;
                return false;
            }
    }
    std::map<xcmp::ParaId, Digest> heads;
    for (const auto& block : doc("xcmp_golden.json")) {
        xcmp::Outgoing out;
        for (const auto& [dest, msgs] : block["outgoing"].items())
            for (const auto& m : msgs)
                out[static_cast<xcmp::ParaId>(std::stoul(dest))].push_back(from_hex(m.get<std::string>()));
        auto c = xcmp::build_commitment(heads, out);
        bool ok = c.message_root.hex() == block["message_root"].get<std::string>();
        for (const auto& [dest, h] : block["heads"].items())
            ok = ok && c.heads.at(static_cast<xcmp::ParaId>(std::stoul(dest))).hex() == h.get<std::string>();
        if (!ok) {
            which = "xcmp block " + block["block"].dump();
            return false;
        }
        heads = c.heads;
    }
    return true;
}

Outcome determinism()
{
    size_t runs = 0, identical = 0;
    for (const auto& cr : catalog_runs()) {
        if (cr.config.seed != 1)
            continue;
        ++runs;
        std::vector<std::string> lines;
        auto again = sim::run(cr.config, [&](const std::string& l) { lines.push_back(l); });
        identical += again.to_json() == cr.report.to_json() && again.to_csv() == cr.report.to_csv() && !lines.empty();
    }
    std::string which;
    bool frozen = goldens(which);
    std::ostringstream o;
    o << identical << "/" << runs << " scenarios re-run byte-identical; trie, epoch randomness and XCMP goldens "
      << (frozen ? "match" : "differ at " + which);
    return {runs > 0 && identical == runs && frozen, str(o)};
}

Outcome guarded(const std::function<Outcome()>& f)
{
    try {
        return f();
    } catch (const std::exception& e) {
        return {false, std::string("error: ") + e.what()};
    }
}

} // namespace

const std::vector<Suite>& all()
{
    static const std::vector<Suite> suites = {
        {1, "inflation", "a simulated year mints 10% of supply", inflation},
        {2, "ghost-figure", "the 100% child is g(V) under 60/40 grandchildren", ghost_figure},
        {3, "grandpa-safety", "no conflicting finality at <= 32% adversarial weight", grandpa_safety},
        {4, "accountable-safety", "conflicting finality exposes >= 1/3 of the weight", accountable_safety},
        {5, "npos-pjr", "PJR, stake conservation and half-optimal support on shipped instances", npos_pjr},
        {6, "erasure", "ceil(N/3) pieces reconstruct and one fewer fails", erasure_threshold},
        {7, "availability", "no invalid finality with an honest checker; rigged runs are slashed", availability},
        {8, "xcmp", "ordering, batching, watermark and fork rules; stall leaves latency alone", xcmp_properties},
        {9, "babe-properties", "common prefix, honest primaries and chain growth", babe_properties},
        {10, "relative-time", "honest slot-start estimates within delta + 1", relative_time},
        {11, "governance", "turnout bias truth table and emergency thresholds", governance},
        {12, "candle-auction", "retroactive close fixtures and post-close bids", candle_auction},
        {13, "determinism", "byte-identical re-runs and frozen vectors", determinism},
    };
    return suites;
}

const Suite* find(const std::string& name)
{
    for (const auto& s : all())
        if (s.name == name || std::to_string(s.number) == name)
            return &s;
    return nullptr;
}

std::string format(const Suite& s, const Outcome& o)
{
    std::ostringstream out;
    out << (o.passed ? "PASS" : "FAIL") << " " << (s.number < 10 ? " " : "") << s.number << " " << s.name << ": "
        << o.detail;
    return out.str();
}

Outcome execute(const Suite& s) { return guarded(s.run); }

} // namespace relaylab::suites
