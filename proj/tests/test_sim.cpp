// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <relaylab/sim.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace relaylab;
using namespace relaylab::sim;

namespace {

ScenarioConfig small(uint64_t slots = 120)
{
    ScenarioConfig c;
    c.validators = 4;
    c.slots = slots;
    return c;
}

TEST(Sim, HonestRunHasNoViolations)
{
    auto c = small(200);
    auto r = run(c);
    EXPECT_FALSE(r.any_violation()) << r.to_json();
    EXPECT_GT(r.finalized_height, 150u);
    EXPECT_EQ(r.common_prefix_violations, 0u);
    EXPECT_EQ(r.epochs_without_honest_primary, 0u);
    EXPECT_EQ(r.messages_sent, r.messages_delivered + r.messages_in_flight);
    EXPECT_LE(r.max_delay, c.delta);
}

TEST(Sim, SameSeedSameReport)
{
    auto c = small();
    c.parachains.count = 2;
    c.parachains.message_rate = {1, 1};
    auto a = run(c).to_json();
    EXPECT_EQ(a, run(c).to_json());
    c.seed = 2;
    EXPECT_NE(a, run(c).to_json());
}

TEST(Sim, TraceSinkSeesEveryEvent)
{
    auto c = small(20);
    size_t lines = 0;
    auto r = run(c, [&](const std::string& l) {
        ++lines;
        EXPECT_EQ(l.front(), '{');
    });
    EXPECT_GT(lines, r.messages_delivered);
}

TEST(Sim, ParachainsDeliverInOrder)
{
    auto c = small();
    c.validators = 8;
    c.parachains.count = 3;
    c.parachains.kinds = {para::StvfKind::counter, para::StvfKind::ledger, para::StvfKind::counter};
    c.parachains.message_rate = {1, 1};
    auto r = run(c);
    EXPECT_FALSE(r.any_violation()) << r.to_json();
    EXPECT_GT(r.candidates_included, 200u);
    EXPECT_GT(r.xcmp_delivered, 100u);
    EXPECT_LE(r.xcmp_latency.max, 2u);
}

TEST(Sim, SplitBrainIsAccountable)
{
    ScenarioConfig c;
    c.validators = 10;
    c.slots = 80;
    c.adversary.count = 4;
    c.adversary.scripts = {Script::split_brain};
    c.adversary.allow_out_of_model = true;
    auto r = run(c);
    ASSERT_GT(r.safety.conflicts, 0u);
    EXPECT_TRUE(r.safety.detected);
    EXPECT_GE(3 * r.safety.culprit_weight, r.safety.total_weight);
    for (auto v : r.safety.culprits)
        EXPECT_TRUE(std::binary_search(r.adversaries.begin(), r.adversaries.end(), v));
    EXPECT_TRUE(r.out_of_model);
}

TEST(Sim, EquivocatorsProduceTwinBlocksAndGetSlashed)
{
    ScenarioConfig c;
    c.validators = 7;
    c.slots = 100;
    c.adversary.count = 2;
    c.adversary.scripts = {Script::equivocate};
    auto r = run(c);
    EXPECT_GT(r.block_equivocations, 0u);
    EXPECT_GT(r.vote_equivocations, 0u);
    EXPECT_GT(r.slash_total, 0u);
    EXPECT_EQ(r.safety.conflicts, 0u);
    EXPECT_GT(r.finalized_height, 80u);
    EXPECT_FALSE(r.any_violation()) << r.to_json();
}

TEST(Sim, CensorshipDelaysButDoesNotStopTransactions)
{
    ScenarioConfig c;
    c.validators = 7;
    c.slots = 100;
    auto honest = run(c);
    c.adversary.count = 2;
    c.adversary.scripts = {Script::censor};
    auto r = run(c);
    EXPECT_GT(r.txs_included, r.txs_submitted * 3 / 4);
    EXPECT_GT(r.inclusion_latency.mean_milli, honest.inclusion_latency.mean_milli);
}

TEST(Sim, WithheldPiecesStillLeaveEnoughForAvailability)
{
    ScenarioConfig c;
    c.validators = 7;
    c.slots = 80;
    c.parachains.count = 2;
    c.adversary.count = 2;
    c.adversary.scripts = {Script::withhold_pieces};
    auto r = run(c);
    EXPECT_GT(r.candidates_included, 100u);
    EXPECT_EQ(r.unavailable, 0u);
    EXPECT_FALSE(r.any_violation()) << r.to_json();
}

TEST(Sim, InvalidCandidatesAreCaughtByHonestAssignees)
{
    ScenarioConfig c;
    c.validators = 8;
    c.slots = 80;
    c.parachains.count = 2;
    c.parachains.adversarial_collators = {0};
    auto r = run(c);
    EXPECT_EQ(r.invalid_finalized, 0u);
    EXPECT_GT(r.candidates_included, 50u);
    EXPECT_FALSE(r.any_violation()) << r.to_json();
}

TEST(Sim, CapturedGroupIsSlashedAfterFishermanReport)
{
    ScenarioConfig c;
    c.validators = 12;
    c.slots = 60;
    c.parachains.count = 4;
    c.parachains.adversarial_collators = {0};
    c.fishermen.count = 1;
    c.fishermen.delay_ticks = 300;
    c.adversary.count = 3;
    c.adversary.scripts = {Script::invalid_candidate};
    c.adversary.rig_checkers = true;
    c.adversary.capture_group = true;
    c.adversary.allow_out_of_model = true;
    auto r = run(c);
    EXPECT_GT(r.invalid_finalized, 0u);
    EXPECT_EQ(r.invalid_finalized_with_honest_checker, 0u);
    ASSERT_GT(r.min_attester_support, 0u);
    EXPECT_GE(r.slash_total, r.attestation_threshold * r.min_attester_support);
}

TEST(Sim, StalledFinalityLeavesDeliveryLatencyAlone)
{
    ScenarioConfig c;
    c.validators = 7;
    c.slots = 120;
    c.parachains.count = 2;
    c.parachains.message_rate = {1, 1};
    auto base = run(c);
    c.adversary.count = 3;
    c.adversary.scripts = {Script::finality_stall};
    auto r = run(c);
    EXPECT_GT(r.finality_lag.max, base.finality_lag.max);
    EXPECT_LE(r.xcmp_latency.mean_milli, base.xcmp_latency.mean_milli + 1000);
    EXPECT_FALSE(r.any_violation()) << r.to_json();
}

TEST(Sim, ClockSyncKeepsHonestEstimatesClose)
{
    ScenarioConfig c;
    c.validators = 7;
    c.slots = 200;
    c.clock.max_drift_ppm = 1000;
    c.clock.max_offset = 10;
    c.clock.sync_gap_slots = 10;
    auto r = run(c);
    EXPECT_GT(r.sync_epochs, 5u);
    EXPECT_LE(r.max_sync_spread, c.delta + 1);
}

TEST(Sim, ApprovedReferendumChangesCode)
{
    auto c = small(60);
    Referendum ref;
    ref.slot = 10;
    ref.turnout = {1, 1};
    ref.aye_share = {1, 1};
    ref.set_code = 1;
    c.referenda.push_back(ref);
    auto r = run(c);
    ASSERT_EQ(r.referenda_approved.size(), 1u);
    EXPECT_TRUE(r.referenda_approved[0]);
    EXPECT_EQ(r.code_variant, 1u);
}

TEST(Sim, EraPayoutsConserveSupply)
{
    auto c = small(200);
    c.economics.slots_per_era = 50;
    auto r = run(c);
    EXPECT_EQ(r.eras, 4u);
    EXPECT_GT(r.minted, 0u);
    EXPECT_EQ(r.supply_start + r.minted, r.supply_end + r.burned);
}

TEST(Rotation, EvenGroups)
{
    auto g = rotate_assignments(0, 18, 6, Digest{});
    ASSERT_EQ(g.size(), 6u);
    std::set<uint32_t> seen;
    for (const auto& [_, members] : g) {
        EXPECT_EQ(members.size(), 3u);
        EXPECT_TRUE(std::is_sorted(members.begin(), members.end()));
        seen.insert(members.begin(), members.end());
    }
    EXPECT_EQ(seen.size(), 18u);
}

TEST(Rotation, RemainderGoesToFirstGroups)
{
    auto g = rotate_assignments(3, 11, 3, Digest{});
    EXPECT_EQ(g[0].size(), 4u);
    EXPECT_EQ(g[1].size(), 4u);
    EXPECT_EQ(g[2].size(), 3u);
}

TEST(Rotation, SingleParachainTakesEveryone)
{
    auto g = rotate_assignments(7, 5, 1, Digest{});
    EXPECT_EQ(g[0], (std::vector<uint32_t>{0, 1, 2, 3, 4}));
}

TEST(Rotation, NoParachainsNoGroups)
{
    EXPECT_TRUE(rotate_assignments(0, 5, 0, Digest{}).empty());
    EXPECT_THROW(rotate_assignments(0, 2, 3, Digest{}), Error);
}

TEST(Rotation, MembershipIsUniformAcrossEras)
{
    // each validator lands on parachain 0 with probability 1/4
    const uint32_t n = 12, p = 4, eras = 500;
    std::vector<uint32_t> hits(n, 0);
    for (uint32_t e = 0; e < eras; ++e) {
        auto groups = rotate_assignments(e, n, p, hash(as_view("r")));
        for (auto v : groups.at(0))
            ++hits[v];
    }
    double mean = eras / 4.0, sd = std::sqrt(eras * 0.25 * 0.75);
    for (auto h : hits)
        EXPECT_LE(std::abs(h - mean), 3 * sd);
}

TEST(Config, RejectsOutOfModelWithoutOptIn)
{
    ScenarioConfig c;
    c.adversary.count = 1;
    c.adversary.scripts = {Script::split_brain};
    EXPECT_THROW(c.validate(), Error);
    c.adversary.allow_out_of_model = true;
    EXPECT_NO_THROW(c.validate());
    c.adversary.scripts.clear();
    c.adversary.rig_checkers = true;
    c.adversary.allow_out_of_model = false;
    EXPECT_THROW(c.validate(), Error);
}

TEST(Config, RejectsUnknownKeysAndBadValues)
{
    EXPECT_THROW(ScenarioConfig::from_json(R"({"validatorz": 4})"), Error);
    EXPECT_THROW(ScenarioConfig::from_json(R"({"adversary": {"scripts": ["teleport"]}})"), Error);
    EXPECT_THROW(ScenarioConfig::from_json(R"({"delta": 30, "slot_ticks": 20})"), Error);
    EXPECT_THROW(ScenarioConfig::from_json(R"({"validators": 0})"), Error);
    EXPECT_THROW(ScenarioConfig::from_json("[1]"), Error);
    try {
        (void)ScenarioConfig::from_json(R"({"parachains": {"count": 2, "bogus": 1}})");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::config);
    }
}

TEST(Config, JsonRoundTrip)
{
    ScenarioConfig c;
    c.name = "round-trip";
    c.validators = 9;
    c.parachains.count = 2;
    c.parachains.kinds = {para::StvfKind::counter, para::StvfKind::ledger};
    c.adversary.count = 2;
    c.adversary.scripts = {Script::censor, Script::delay_maximal};
    c.clock.sync_gap_slots = 9;
    Referendum ref;
    ref.slot = 4;
    ref.bias = gov::Bias::negative_turnout;
    ref.set_code = 1;
    c.referenda.push_back(ref);
    auto text = c.to_json();
    EXPECT_EQ(ScenarioConfig::from_json(text).to_json(), text);
}

} // namespace
