// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <relaylab/parachain.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace relaylab;
using namespace relaylab::para;

namespace {

PovBlock pov_on(ParaId para, const HeadData& parent, std::string_view payload, xcmp::Outgoing out = {})
{
    PovBlock p;
    p.para = para;
    p.parent_head = parent.encode();
    p.payload = to_bytes(payload);
    p.outgoing = std::move(out);
    return p;
}

struct Validators {
    crypto::KeyRegistry registry;
    std::vector<crypto::KeyPair> keys;

    explicit Validators(size_t n)
    {
        for (size_t i = 0; i < n; ++i)
            keys.push_back(registry.generate("validator-" + std::to_string(i)));
    }

    std::vector<AssignedValidator> group(std::vector<uint32_t> idx, bool honest) const
    {
        std::vector<AssignedValidator> g;
        for (auto i : idx)
            g.push_back({i, &keys[i], honest});
        return g;
    }

    std::map<uint32_t, crypto::PublicKey> publics(std::vector<uint32_t> idx) const
    {
        std::map<uint32_t, crypto::PublicKey> m;
        for (auto i : idx)
            m[i] = keys[i].public_key;
        return m;
    }
};

} // namespace

TEST(Stvf, CounterIncrements)
{
    auto parent = genesis_head(StvfKind::counter);
    parent.app_state = counter_state(7);
    auto res = stvf_validate(StvfKind::counter, pov_on(1, parent, "+1"), parent.encode(), {});
    ASSERT_TRUE(res.valid) << res.reason;
    auto head = HeadData::decode(res.head);
    EXPECT_EQ(counter_value(head.app_state), 8u);
    EXPECT_EQ(head.number, 1u);
}

TEST(Stvf, MalformedPayloadIsInvalidVerdict)
{
    auto parent = genesis_head(StvfKind::counter);
    for (std::string_view bad : {"", "+", "-1", "+x", "+1 "}) {
        auto res = stvf_validate(StvfKind::counter, pov_on(1, parent, bad), parent.encode(), {});
        EXPECT_FALSE(res.valid) << bad;
    }
    Bytes garbage{1, 2, 3};
    auto p = pov_on(1, parent, "+1");
    p.parent_head = garbage;
    EXPECT_FALSE(stvf_validate(StvfKind::counter, p, garbage, {}).valid);
}

TEST(Stvf, AdversarialAlwaysInvalid)
{
    auto parent = genesis_head(StvfKind::adversarial);
    EXPECT_FALSE(stvf_validate(StvfKind::adversarial, pov_on(3, parent, "+1"), parent.encode(), {}).valid);
}

TEST(Stvf, LedgerTransfersAndDoubleSpend)
{
    auto parent = genesis_head(StvfKind::ledger, {{"alice", 10}, {"bob", 0}});
    auto ok = stvf_validate(StvfKind::ledger, pov_on(2, parent, "alice>bob:6;bob>carol:2"), parent.encode(), {});
    ASSERT_TRUE(ok.valid) << ok.reason;
    auto bal = ledger_balances(HeadData::decode(ok.head).app_state);
    EXPECT_EQ(bal.at("alice"), 4u);
    EXPECT_EQ(bal.at("bob"), 4u);
    EXPECT_EQ(bal.at("carol"), 2u);

    // each spend alone is covered, both together are not
    EXPECT_TRUE(stvf_validate(StvfKind::ledger, pov_on(2, parent, "alice>bob:6"), parent.encode(), {}).valid);
    auto dbl = stvf_validate(StvfKind::ledger, pov_on(2, parent, "alice>bob:6;alice>carol:6"), parent.encode(), {});
    EXPECT_FALSE(dbl.valid);
    EXPECT_FALSE(stvf_validate(StvfKind::ledger, pov_on(2, parent, "alice>bob"), parent.encode(), {}).valid);
}

TEST(Stvf, OutgoingCommitmentAndBlocklist)
{
    auto parent = genesis_head(StvfKind::counter);
    xcmp::Outgoing out{{5, {to_bytes("hi")}}};
    auto res = stvf_validate(StvfKind::counter, pov_on(1, parent, "+1", out), parent.encode(), {});
    ASSERT_TRUE(res.valid);
    EXPECT_EQ(HeadData::decode(res.head).message_root, xcmp::build_commitment({}, out).message_root);
    EXPECT_EQ(res.outgoing, out);

    RelayInputs blocked;
    blocked.blocklist = {{5, {1}}};
    EXPECT_FALSE(stvf_validate(StvfKind::counter, pov_on(1, parent, "+1", out), parent.encode(), blocked).valid);
}

TEST(Stvf, ConsumesInboxAndAdvancesWatermark)
{
    std::map<ParaId, Digest> heads;
    xcmp::IncludedHeader h;
    h.para = 4;
    h.prev_heads = heads;
    h.outbox = {{1, {to_bytes("m1"), to_bytes("m2")}}};
    h.commitment = xcmp::build_commitment(heads, h.outbox);
    xcmp::ForkView fork;
    fork.blocks.push_back(std::make_shared<const xcmp::RelayEntry>(xcmp::RelayEntry{1, hash(as_view("r1")), {h}}));
    RelayInputs in;
    in.fork = &fork;
    in.max_para = 4;
    auto parent = genesis_head(StvfKind::counter);
    auto res = stvf_validate(StvfKind::counter, pov_on(1, parent, "+1"), parent.encode(), in);
    ASSERT_TRUE(res.valid);
    auto head = HeadData::decode(res.head);
    EXPECT_EQ(head.watermark, (xcmp::Watermark{1, 4}));
    EXPECT_EQ(head.inbox_digest, h.commitment.heads.at(1));
    ASSERT_EQ(res.received.size(), 1u);
}

TEST(Encoding, RoundTrips)
{
    auto h = genesis_head(StvfKind::counter);
    h.out_heads[3] = hash(as_view("x"));
    h.watermark = {9, 2};
    EXPECT_EQ(HeadData::decode(h.encode()).encode(), h.encode());
    auto p = pov_on(1, h, "+5", {{2, {to_bytes("a")}}});
    EXPECT_EQ(PovBlock::decode(p.encode()).encode(), p.encode());
}

TEST(Pipeline, HonestReceiptCarriesAllSignatures)
{
    Validators v(10);
    auto parent = genesis_head(StvfKind::counter);
    auto pov = pov_on(1, parent, "+1");
    std::vector<uint32_t> idx{0, 1, 2};
    auto res = candidate_pipeline(StvfKind::counter, pov, hash(as_view("relay")), {}, v.group(idx, true), 10);
    ASSERT_TRUE(res.receipt);
    EXPECT_EQ(res.receipt->attestations.size(), 3u);
    EXPECT_TRUE(attestations_valid(*res.receipt, v.publics(idx), v.registry));
    EXPECT_EQ(res.pieces.root, res.receipt->erasure_root);
    EXPECT_EQ(res.pieces.k, 4u);
    auto blob = erasure::reconstruct(std::span(res.pieces.pieces).subspan(6), 10, res.receipt->erasure_root);
    EXPECT_EQ(PovBlock::decode(blob).hash(), res.receipt->pov_hash);

    auto bad = *res.receipt;
    bad.attestations.pop_back();
    bad.attestations.pop_back();
    EXPECT_FALSE(attestations_valid(bad, v.publics(idx), v.registry));
    auto forged = *res.receipt;
    forged.head_data.push_back(0);
    EXPECT_FALSE(attestations_valid(forged, v.publics(idx), v.registry));
    EXPECT_EQ(CandidateReceipt::decode(res.receipt->encode()).encode(), res.receipt->encode());
}

TEST(Pipeline, InvalidPovWithHonestGroupHasNoReceipt)
{
    Validators v(6);
    auto parent = genesis_head(StvfKind::adversarial);
    auto res = candidate_pipeline(StvfKind::adversarial, pov_on(9, parent, "evil"), {}, {}, v.group({0, 1, 2}, true), 6);
    EXPECT_FALSE(res.receipt);
    EXPECT_EQ(res.rejected_by.size(), 3u);
}

TEST(Pipeline, AdversarialGroupCaughtBySecondaryChecks)
{
    Validators v(12);
    auto parent = genesis_head(StvfKind::adversarial);
    auto pov = pov_on(9, parent, "evil");
    std::vector<uint32_t> idx{3, 4, 5};
    auto res = candidate_pipeline(StvfKind::adversarial, pov, {}, {}, v.group(idx, false), 12);
    ASSERT_TRUE(res.receipt);
    EXPECT_TRUE(attestations_valid(*res.receipt, v.publics(idx), v.registry));

    // an honest checker rebuilds the block from pieces and re-runs validation
    auto c = res.receipt->hash();
    auto checkers = assign_secondary_checkers(c, hash(as_view("epoch")), 12, v.keys);
    ASSERT_EQ(checkers.size(), 12u);
    auto blob = erasure::reconstruct(res.pieces.pieces, 12, res.receipt->erasure_root);
    auto rebuilt = PovBlock::decode(blob);
    bool invalid = !stvf_validate(StvfKind::adversarial, rebuilt, rebuilt.parent_head, {}).valid;
    EXPECT_TRUE(invalid);

    std::map<Digest, CandidateRecord> known{{c, {idx, invalid, true}}};
    auto fx = process_report({ReportKind::checker_verdict, "validator-0", c, 0, true}, known);
    EXPECT_EQ(fx.slash_validators, idx);
    EXPECT_EQ(fx.reward_reporter, "validator-0");
    EXPECT_TRUE(fx.withhold_finality);
}

TEST(Checkers, CountFormula)
{
    EXPECT_EQ(secondary_checker_count(0, 0, 2, 100), 2u);
    EXPECT_EQ(secondary_checker_count(3, 2, 2, 100), 10u);
    EXPECT_EQ(secondary_checker_count(3, 2, 2, 7), 7u);
    for (size_t inv = 0; inv < 6; ++inv)
        for (size_t un = 0; un < 6; ++un) {
            auto c = secondary_checker_count(inv, un, 2, 50);
            EXPECT_GE(c, 2u);
            EXPECT_GE(c, secondary_checker_count(inv > 0 ? inv - 1 : 0, un, 2, 50));
            EXPECT_GE(c, secondary_checker_count(inv, un > 0 ? un - 1 : 0, 2, 50));
        }
}

TEST(Checkers, DeterministicAndUniform)
{
    Validators v(20);
    auto r = hash(as_view("epoch-randomness"));
    EXPECT_EQ(assign_secondary_checkers(hash(as_view("c")), r, 5, v.keys),
              assign_secondary_checkers(hash(as_view("c")), r, 5, v.keys));
    EXPECT_EQ(assign_secondary_checkers(hash(as_view("c")), r, 20, v.keys).size(), 20u);

    constexpr int trials = 1000;
    const size_t count = 5, n = 20;
    std::vector<int> hits(n, 0);
    for (int t = 0; t < trials; ++t)
        for (auto i : assign_secondary_checkers(hash(as_view("cand" + std::to_string(t))), r, count, v.keys))
            ++hits[i];
    double p = static_cast<double>(count) / n;
    double mean = trials * p, sigma = std::sqrt(trials * p * (1 - p));
    for (size_t i = 0; i < n; ++i)
        EXPECT_LE(std::abs(hits[i] - mean), 3 * sigma) << "validator " << i << " hits " << hits[i];
}

TEST(Reports, Outcomes)
{
    auto bad = hash(as_view("bad")), good = hash(as_view("good")), gone = hash(as_view("gone"));
    std::map<Digest, CandidateRecord> known{
        {bad, {{1, 2, 3}, true, true}}, {good, {{4, 5}, false, true}}, {gone, {{6}, false, false}}};

    auto fx = process_report({ReportKind::fisherman_invalid, "fish", bad, 100, true}, known);
    EXPECT_EQ(fx.slash_validators.size(), 3u);
    EXPECT_EQ(fx.reward_reporter, "fish");

    auto false_claim = process_report({ReportKind::fisherman_invalid, "fish", good, 100, true}, known);
    EXPECT_TRUE(false_claim.slash_reporter_bond);
    EXPECT_TRUE(false_claim.slash_validators.empty());

    auto un = process_report({ReportKind::unavailability, "v", gone, 0, true}, known);
    EXPECT_TRUE(un.escalate);
    EXPECT_TRUE(un.withhold_finality);
    EXPECT_FALSE(process_report({ReportKind::unavailability, "v", good, 0, true}, known).escalate);

    try {
        (void)process_report({ReportKind::fisherman_invalid, "fish", hash(as_view("?")), 100, true}, known);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::unknown_candidate);
    }
    EXPECT_THROW((void)process_report({ReportKind::fisherman_invalid, "fish", bad, 0, true}, known), Error);
}
