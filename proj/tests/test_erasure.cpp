// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <relaylab/erasure.hpp>

#include <gtest/gtest.h>

#include <numeric>
#include <random>

using namespace relaylab;
using namespace relaylab::erasure;

namespace {

// schoolbook carry-less product reduced by the field polynomial
uint16_t slow_mul(uint16_t a, uint16_t b)
{
    uint32_t acc = 0;
    for (int i = 0; i < 16; ++i)
        if (b & (1u << i))
            acc ^= static_cast<uint32_t>(a) << i;
    for (int bit = 31; bit >= 16; --bit)
        if (acc & (1u << bit))
            acc ^= 0x1100Bu << (bit - 16);
    return static_cast<uint16_t>(acc);
}

Bytes random_blob(std::mt19937_64& rng, size_t len)
{
    Bytes b(len);
    for (auto& x : b)
        x = static_cast<uint8_t>(rng());
    return b;
}

template <typename Fn>
void for_each_subset(size_t n, size_t r, Fn fn)
{
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + static_cast<ptrdiff_t>(r), true);
    do {
        std::vector<size_t> idx;
        for (size_t i = 0; i < n; ++i)
            if (pick[i])
                idx.push_back(i);
        fn(idx);
    } while (std::prev_permutation(pick.begin(), pick.end()));
}

std::vector<Piece> select(const ErasurePieces& ep, const std::vector<size_t>& idx)
{
    std::vector<Piece> out;
    for (auto i : idx)
        out.push_back(ep.pieces[i]);
    return out;
}

} // namespace

TEST(Field, MultiplicationMatchesSchoolbook)
{
    std::mt19937_64 rng(1);
    for (int i = 0; i < 20000; ++i) {
        auto a = static_cast<uint16_t>(rng());
        auto b = static_cast<uint16_t>(rng());
        ASSERT_EQ(gf::mul(a, b), slow_mul(a, b));
    }
}

TEST(Field, GeneratorIsPrimitiveAndInversesWork)
{
    EXPECT_EQ(gf::generator_order(), 65535u);
    for (uint32_t a = 1; a < 65536; a += 97)
        ASSERT_EQ(gf::mul(static_cast<uint16_t>(a), gf::inv(static_cast<uint16_t>(a))), 1);
}

TEST(Erasure, ThresholdIsCeilingThird)
{
    EXPECT_EQ(threshold(10), 4u);
    EXPECT_EQ(threshold(3), 1u);
    EXPECT_EQ(threshold(1), 1u);
    EXPECT_EQ(threshold(12), 4u);
    EXPECT_EQ(threshold(13), 5u);
}

TEST(Erasure, SingleShardHoldsBlob)
{
    auto blob = to_bytes("parachain block");
    auto ep = encode(blob, 3);
    ASSERT_EQ(ep.k, 1u);
    ByteReader r(ep.pieces[0].data);
    EXPECT_EQ(r.u64(), blob.size());
    auto body = r.raw(blob.size());
    EXPECT_TRUE(std::equal(body.begin(), body.end(), blob.begin()));
    // each parity shard alone also reconstructs
    for (size_t i = 0; i < 3; ++i)
        EXPECT_EQ(reconstruct(std::span(&ep.pieces[i], 1), 3, ep.root), blob);
}

TEST(Erasure, EmptyBlobRoundTrips)
{
    auto ep = encode({}, 7);
    EXPECT_EQ(reconstruct(std::span(ep.pieces).subspan(4, 3), 7, ep.root), Bytes{});
}

TEST(Erasure, EveryThresholdSubsetReconstructsExhaustively)
{
    std::mt19937_64 rng(2);
    for (size_t n = 4; n <= 12; ++n) {
        auto blob = random_blob(rng, 1 + rng() % 200);
        auto ep = encode(blob, n);
        const size_t k = threshold(n);
        for_each_subset(n, k, [&](const std::vector<size_t>& idx) {
            auto sub = select(ep, idx);
            ASSERT_EQ(reconstruct(sub, n, ep.root), blob) << "n=" << n;
        });
        for_each_subset(n, k - 1, [&](const std::vector<size_t>& idx) {
            auto sub = select(ep, idx);
            try {
                (void)reconstruct(sub, n, ep.root);
                FAIL() << "k-1 pieces reconstructed, n=" << n;
            } catch (const Error& e) {
                ASSERT_EQ(e.kind(), ErrorKind::insufficient_pieces);
            }
        });
    }
}

TEST(Erasure, SampledSubsetsReconstructUpToTwenty)
{
    std::mt19937_64 rng(3);
    for (size_t n = 13; n <= 20; ++n) {
        auto blob = random_blob(rng, 50 + rng() % 500);
        auto ep = encode(blob, n);
        const size_t k = threshold(n);
        std::vector<size_t> all(n);
        std::iota(all.begin(), all.end(), 0);
        for (int s = 0; s < 100; ++s) {
            std::shuffle(all.begin(), all.end(), rng);
            std::vector<size_t> idx(all.begin(), all.begin() + static_cast<ptrdiff_t>(k));
            ASSERT_EQ(reconstruct(select(ep, idx), n, ep.root), blob);
        }
    }
}

TEST(Erasure, TamperedPiecesAreExcluded)
{
    std::mt19937_64 rng(4);
    auto blob = random_blob(rng, 300);
    auto ep = encode(blob, 9);
    auto sub = select(ep, {0, 4, 8});
    sub[1].data[3] ^= 1;
    EXPECT_THROW((void)reconstruct(sub, 9, ep.root), Error);
    sub.push_back(ep.pieces[5]);
    EXPECT_EQ(reconstruct(sub, 9, ep.root), blob);
    // wrong root rejects everything
    Digest other = hash(as_view("other"));
    EXPECT_THROW((void)reconstruct(ep.pieces, 9, other), Error);
}

TEST(Erasure, DuplicatePiecesCountOnce)
{
    auto ep = encode(to_bytes("xyz"), 6);
    std::vector<Piece> sub{ep.pieces[2], ep.pieces[2]};
    EXPECT_THROW((void)reconstruct(sub, 6, ep.root), Error);
}
