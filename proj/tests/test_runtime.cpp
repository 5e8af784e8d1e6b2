// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <relaylab/runtime.hpp>

#include <gtest/gtest.h>
#include <json.hpp>

#include <fstream>

using namespace relaylab;
using namespace relaylab::runtime;

namespace {

struct Fixture {
    crypto::KeyRegistry registry;
    std::map<AccountId, crypto::KeyPair> keys;
    std::unique_ptr<Runtime> rt;

    explicit Fixture(std::map<AccountId, uint64_t> balances = {{1, 1'000'000'000}, {2, 500'000'000}})
    {
        Genesis g;
        for (AccountId a : {0u, 1u, 2u, 3u}) {
            keys[a] = registry.generate("account-" + std::to_string(a));
            g.keys[a] = keys[a].public_key;
        }
        g.balances = std::move(balances);
        rt = std::make_unique<Runtime>(g, registry);
    }

    Extrinsic sign(Extrinsic e, AccountId who, uint64_t nonce) { return signed_by(std::move(e), who, nonce, keys[who].secret); }
};

Body block(AccountId author, uint64_t time, std::vector<Extrinsic> txs)
{
    Body b{author, {make_timestamp(time)}};
    b.extrinsics.insert(b.extrinsics.end(), txs.begin(), txs.end());
    return b;
}

} // namespace

TEST(Validate, Reasons)
{
    Fixture f;
    auto s = f.rt->genesis_state();
    EXPECT_EQ(f.rt->validate_extrinsic(s, f.sign(make_transfer(2, 10), 1, 0)), std::nullopt);
    EXPECT_EQ(f.rt->validate_extrinsic(s, f.sign(make_transfer(2, 2'000'000'000), 1, 0)), Reject::insufficient_funds);
    EXPECT_EQ(f.rt->validate_extrinsic(s, make_transfer(2, 10)), Reject::bad_signature);
    auto replayed = f.sign(make_transfer(2, 10), 1, 0);
    replayed.signer = 2;
    EXPECT_EQ(f.rt->validate_extrinsic(s, replayed), Reject::bad_signature);
    EXPECT_EQ(f.rt->validate_extrinsic(s, f.sign(make_transfer(2, 10), 1, 1)), Reject::future_nonce);
    EXPECT_EQ(f.rt->validate_extrinsic(s, make_timestamp(5)), Reject::inherent_outside_block);
    EXPECT_EQ(f.rt->validate_extrinsic(s, f.sign(make_set_code(1), 1, 0)), Reject::bad_origin);
    std::string huge(4'000'000, 'x');
    EXPECT_EQ(f.rt->validate_extrinsic(s, f.sign(make_remark(huge), 1, 0)), Reject::over_resource);

    uint64_t fees = 0;
    auto after = f.rt->apply_transaction(s, f.sign(make_transfer(2, 10), 1, 0), fees);
    EXPECT_EQ(f.rt->validate_extrinsic(after, f.sign(make_transfer(2, 10), 1, 0)), Reject::stale_nonce);
}

TEST(Apply, EmptyBlockOnlySetsTime)
{
    Fixture f;
    auto s = f.rt->genesis_state();
    auto a = f.rt->execute(s, block(0, 100, {}));
    auto b = f.rt->execute(s, block(0, 100, {}));
    EXPECT_EQ(a.root(), b.root());
    EXPECT_NE(a.root(), s.root());
    EXPECT_EQ(Runtime::time(a), 100u);
    EXPECT_EQ(Runtime::balance(a, 1), Runtime::balance(s, 1));
    EXPECT_THROW((void)f.rt->execute(s, Body{0, {}}), Error);
}

TEST(Apply, MatchesIndependentGoldenRoot)
{
    std::ifstream in(RELAYLAB_TEST_DATA "/runtime_golden.json");
    ASSERT_TRUE(in.good());
    auto doc = nlohmann::json::parse(in);
    std::map<AccountId, uint64_t> genesis;
    for (const auto& [k, v] : doc["genesis"].items())
        genesis[static_cast<AccountId>(std::stoul(k))] = v.get<uint64_t>();
    Fixture f(genesis);
    std::vector<Extrinsic> txs;
    for (const auto& t : doc["transactions"]) {
        auto call = t["call"].get<std::string>();
        Extrinsic e = call == "transfer" ? make_transfer(t["to"], t["amount"])
                      : call == "bond"   ? make_bond(t["amount"])
                                         : make_remark(t["text"].get<std::string>());
        txs.push_back(f.sign(e, t["signer"], t["nonce"]));
    }
    auto body = block(doc["author"], doc["timestamp"], txs);
    auto post = f.rt->apply_block(f.rt->genesis_state(), body, Digest::from_hex(doc["post_root"].get<std::string>()));
    for (const auto& [k, v] : doc["balances"].items())
        EXPECT_EQ(Runtime::balance(post, static_cast<AccountId>(std::stoul(k))), v.get<uint64_t>()) << k;
    EXPECT_EQ(Runtime::treasury(post), doc["treasury"].get<uint64_t>());
    EXPECT_EQ(Runtime::multiplier(post), doc["multiplier"].get<uint64_t>());
    EXPECT_EQ(Runtime::total_issuance(post), Runtime::total_issuance(f.rt->genesis_state()));
}

TEST(Apply, RootMismatchAndFailingTransactionInvalidateBlock)
{
    Fixture f;
    auto s = f.rt->genesis_state();
    auto good = block(3, 10, {f.sign(make_transfer(2, 10), 1, 0)});
    auto root = f.rt->execute(s, good).root();
    try {
        (void)f.rt->apply_block(s, good, Digest{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::invalid_block);
    }
    EXPECT_NO_THROW((void)f.rt->apply_block(s, good, root));

    auto bad = block(3, 10, {f.sign(make_transfer(2, 10), 1, 0), f.sign(make_transfer(2, 10), 1, 0)});
    EXPECT_THROW((void)f.rt->execute(s, bad), Error);
    auto late_inherent = good;
    late_inherent.extrinsics.push_back(make_timestamp(11));
    EXPECT_THROW((void)f.rt->execute(s, late_inherent), Error);
}

TEST(Apply, SetCodeSwapsFeeVariant)
{
    Fixture f({{0, 1'000'000'000}, {1, 1'000'000'000}});
    auto s = f.rt->genesis_state();
    auto transfer = f.sign(make_transfer(2, 1), 1, 0);
    auto before = f.rt->fee_of(s, transfer);
    auto upgraded = f.rt->execute(s, block(3, 1, {f.sign(make_set_code(1), 0, 0)}));
    EXPECT_EQ(Runtime::code_variant(upgraded), 1u);
    EXPECT_GT(f.rt->fee_of(upgraded, transfer), before);
    EXPECT_EQ(f.rt->validate_extrinsic(s, f.sign(make_set_code(9), 0, 0)), Reject::malformed);
}

TEST(Apply, ReplayDeterminismAndConservation)
{
    Fixture f;
    auto run = [&] {
        auto s = f.rt->genesis_state();
        for (uint64_t n = 0; n < 5; ++n)
            s = f.rt->execute(s, block(3, n * 6, {f.sign(make_transfer(2, 100 + n), 1, n),
                                                  f.sign(make_transfer(1, 50), 2, n)}));
        return s;
    };
    auto a = run(), b = run();
    EXPECT_EQ(a.root(), b.root());
    EXPECT_EQ(Runtime::total_issuance(a), 1'500'000'000u);
}

TEST(Inherents, TimestampToleranceAndCandidates)
{
    EXPECT_TRUE(inherent_check(block(0, 600, {}), 600, 0, [](auto&) { return true; }));
    EXPECT_TRUE(inherent_check(block(0, 605, {}), 600, 5, [](auto&) { return true; }));
    EXPECT_FALSE(inherent_check(block(0, 606, {}), 600, 5, [](auto&) { return true; }));
    EXPECT_FALSE(inherent_check(Body{}, 600, 5, [](auto&) { return true; }));

    para::CandidateReceipt r;
    r.para = 7;
    auto with = block(0, 600, {});
    with.extrinsics.push_back(make_candidates({r}));
    EXPECT_TRUE(inherent_check(with, 600, 0, [](auto& c) { return c.para == 7; }));
    EXPECT_FALSE(inherent_check(with, 600, 0, [](auto&) { return false; }));

    Fixture f;
    auto post = f.rt->execute(f.rt->genesis_state(), with);
    EXPECT_EQ(Runtime::para_head(post, 7), r.head_data);
}

TEST(Queue, DependencyOrderAndPriority)
{
    Fixture f({{0, 1'000'000'000}, {1, 1'000'000'000}, {2, 1'000'000'000}});
    auto s = f.rt->genesis_state();
    TransactionQueue q;
    // nonce 1 arrives before nonce 0
    EXPECT_EQ(q.submit(*f.rt, s, f.sign(make_transfer(3, 1), 1, 1)), std::nullopt);
    EXPECT_EQ(q.submit(*f.rt, s, f.sign(make_transfer(3, 2), 2, 0)), std::nullopt);
    EXPECT_EQ(q.submit(*f.rt, s, f.sign(make_transfer(3, 3), 1, 0)), std::nullopt);
    EXPECT_EQ(q.submit(*f.rt, s, f.sign(make_set_code(1), 0, 0)), std::nullopt);
    EXPECT_EQ(q.submit(*f.rt, s, make_transfer(3, 1)), Reject::bad_signature);

    auto picked = q.select(*f.rt, s);
    ASSERT_EQ(picked.size(), 4u);
    EXPECT_EQ(picked[0].call, Call::set_code);
    EXPECT_EQ(picked[1].signer, 2u);
    EXPECT_EQ(picked[2].signer, 1u);
    EXPECT_EQ(picked[2].nonce, 0u);
    EXPECT_EQ(picked[3].nonce, 1u);

    auto post = f.rt->execute(s, block(3, 1, picked));
    q.prune(post);
    EXPECT_EQ(q.size(), 0u);
}

TEST(Queue, TruncatesAtBlockLimits)
{
    Fixture f;
    auto s = f.rt->genesis_state();
    TransactionQueue q;
    std::string big(1'500'000, 'x');
    for (uint64_t n = 0; n < 4; ++n)
        ASSERT_EQ(q.submit(*f.rt, s, f.sign(make_remark(big), 1, n)), std::nullopt);
    auto picked = q.select(*f.rt, s);
    EXPECT_EQ(picked.size(), 2u); // 3.75 MB regular budget
    EXPECT_NO_THROW((void)f.rt->execute(s, block(3, 1, picked)));
    auto all = picked;
    for (uint64_t n = 2; n < 4; ++n)
        all.push_back(f.sign(make_remark(big), 1, n));
    EXPECT_THROW((void)f.rt->execute(s, block(3, 1, all)), Error);
}

TEST(Genesis, FromJson)
{
    crypto::KeyRegistry reg;
    auto g = Genesis::from_json(R"({"governance": 0, "accounts": [{"id": 0, "seed": "gov"}, {"id": 5, "seed": "e", "balance": 9}]})", reg);
    EXPECT_EQ(g.balances.at(5), 9u);
    EXPECT_EQ(reg.size(), 2u);
    try {
        (void)Genesis::from_json("{}", reg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::config);
    }
}
