// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <relaylab/npos.hpp>

#include "npos_oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace relaylab;
using namespace relaylab::npos;

namespace {

void expect_conservation(const ElectionInstance& in, const ElectionResult& r)
{
    std::set<CandidateId> committee(r.committee.begin(), r.committee.end());
    for (const auto& n : in.nominators) {
        bool backs_elected = false;
        for (const auto& a : n.approvals)
            backs_elected |= committee.contains(a);
        uint64_t sum = 0;
        for (const auto& [edge, amount] : r.distribution)
            if (edge.first == n.id) {
                sum += amount;
                EXPECT_TRUE(committee.contains(edge.second));
                EXPECT_NE(std::find(n.approvals.begin(), n.approvals.end(), edge.second), n.approvals.end());
            }
        EXPECT_EQ(sum, backs_elected ? n.stake : 0) << n.id;
    }
}

} // namespace

TEST(Elect, ForcedSingleCandidate)
{
    ElectionInstance in{{{"n1", 100, {"A"}}}, {"A"}, 1};
    auto r = elect(in);
    EXPECT_EQ(r.committee, std::vector<CandidateId>{"A"});
    EXPECT_EQ((r.distribution.at({"n1", "A"})), 100u);
    EXPECT_EQ(r.min_support(), 100u);
}

TEST(Elect, SymmetricSingletonApprovals)
{
    ElectionInstance in{{{"n1", 10, {"A"}}, {"n2", 10, {"B"}}, {"n3", 10, {"C"}}, {"n4", 10, {"D"}}},
                        {"A", "B", "C", "D"},
                        2};
    auto r = elect(in);
    EXPECT_EQ(r.committee.size(), 2u);
    EXPECT_EQ(r.min_support(), 10u);
}

TEST(Elect, InfeasibleInstances)
{
    ElectionInstance too_few{{{"n", 5, {"A"}}}, {"A"}, 2};
    try {
        (void)elect(too_few);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::instance_infeasible);
    }
    ElectionInstance no_stake{{{"n", 0, {"A"}}}, {"A"}, 1};
    EXPECT_THROW((void)elect(no_stake), Error);
}

TEST(Elect, FillsSeatsWithUnbackedCandidates)
{
    ElectionInstance in{{{"n", 10, {"B"}}}, {"A", "B", "C"}, 3};
    auto r = elect(in);
    EXPECT_EQ(r.committee, (std::vector<CandidateId>{"A", "B", "C"}));
    EXPECT_EQ(r.min_support(), 0u);
}

TEST(CheckPjr, FullCoverageIsProportional)
{
    ElectionInstance in{{{"n1", 30, {"A", "B"}}, {"n2", 20, {"C"}}}, {"A", "B", "C", "D"}, 3};
    std::vector<CandidateId> committee{"A", "B", "C"};
    EXPECT_TRUE(check_pjr(in, committee));
}

TEST(CheckPjr, UnrepresentedCohesiveGroupFails)
{
    // stakes 50+50 on {A} is the whole electorate; t = 1 needs one seat from {A}
    ElectionInstance in{{{"n1", 50, {"A"}}, {"n2", 50, {"A"}}}, {"A", "B", "C"}, 2};
    std::vector<CandidateId> committee{"B", "C"};
    EXPECT_FALSE(check_pjr(in, committee));
    std::vector<CandidateId> good{"A", "B"};
    EXPECT_TRUE(check_pjr(in, good));
}

TEST(CheckPjr, CapExceeded)
{
    ElectionInstance in;
    for (int i = 0; i < 13; ++i)
        in.nominators.push_back({"n" + std::to_string(i), 1, {"A"}});
    in.candidates = {"A", "B"};
    in.committee_size = 1;
    std::vector<CandidateId> committee{"A"};
    try {
        (void)check_pjr(in, committee);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::cap_exceeded);
    }
}

TEST(Balance, SymmetricSplit)
{
    ElectionInstance in{{{"n1", 100, {"A", "B"}}}, {"A", "B"}, 2};
    std::vector<CandidateId> committee{"A", "B"};
    auto r = balance_distribution(in, committee);
    EXPECT_EQ((r.distribution.at({"n1", "A"})), 50u);
    EXPECT_EQ((r.distribution.at({"n1", "B"})), 50u);
}

TEST(Balance, TwoVariableEquation)
{
    // x + 40 = 100 - x  =>  x = 30; supports (70, 70)
    ElectionInstance in{{{"n1", 100, {"A", "B"}}, {"n2", 40, {"B"}}}, {"A", "B"}, 2};
    std::vector<CandidateId> committee{"A", "B"};
    auto r = balance_distribution(in, committee);
    auto s = r.supports();
    EXPECT_EQ(s.at("A"), 70u);
    EXPECT_EQ(s.at("B"), 70u);
    EXPECT_EQ((r.distribution.at({"n1", "B"})), 30u);
}

TEST(Balance, RebalancingNeverLowersMinSupport)
{
    std::mt19937_64 rng(21);
    for (int iter = 0; iter < 300; ++iter) {
        auto in = oracle::random_instance(rng, 6, 8, 3, 100);
        auto committee = phragmen_committee(in);
        // skewed start: everything on the first elected approval
        ElectionResult start;
        start.committee = committee;
        std::set<CandidateId> cset(committee.begin(), committee.end());
        for (const auto& n : in.nominators) {
            std::vector<CandidateId> backed;
            for (const auto& a : n.approvals)
                if (cset.contains(a))
                    backed.push_back(a);
            std::sort(backed.begin(), backed.end());
            if (!backed.empty() && n.stake > 0)
                start.distribution[{n.id, backed.front()}] = n.stake;
        }
        auto before = start.min_support();
        auto after = rebalance(in, start);
        ASSERT_GE(after.min_support(), before);
        expect_conservation(in, after);
    }
}

TEST(Elect, ForcedCommitteeMinSupportMatchesOracle)
{
    // balancing a fixed committee reaches the exact maximin value within one unit per seat
    std::mt19937_64 rng(22);
    for (int iter = 0; iter < 300; ++iter) {
        auto in = oracle::random_instance(rng, 6, 6, 3, 1000);
        auto committee = phragmen_committee(in);
        auto r = balance_distribution(in, committee);
        auto opt = oracle::committee_maximin(in, committee);
        // opt is a rational num/den; integer balancing is within the grid tolerance
        ASSERT_LE(r.min_support() * opt.den, opt.num);
        ASSERT_GE((r.min_support() + committee.size()) * opt.den, opt.num);
    }
}

TEST(Elect, RandomInstancesMeetHalfOfBruteForceOptimum)
{
    std::mt19937_64 rng(23);
    double worst = 1.0;
    for (int iter = 0; iter < 1000; ++iter) {
        auto in = oracle::random_instance(rng, 6, 6, 3, 1000);
        auto r = elect(in);
        ASSERT_EQ(r.committee.size(), in.committee_size);
        expect_conservation(in, r);
        auto opt = oracle::best_maximin(in);
        // min_support >= opt / 2
        ASSERT_GE(2 * static_cast<unsigned __int128>(r.min_support()) * opt.den, static_cast<unsigned __int128>(opt.num))
            << "iteration " << iter;
        if (opt.num > 0)
            worst = std::min(worst, static_cast<double>(r.min_support()) * static_cast<double>(opt.den) /
                                        static_cast<double>(opt.num));
    }
    RecordProperty("worst_ratio", std::to_string(worst));
    std::cout << "measured worst min_support / optimum: " << worst << "\n";
}

TEST(Elect, ElectedCommitteesArePjr)
{
    std::mt19937_64 rng(24);
    for (int iter = 0; iter < 1000; ++iter) {
        auto in = oracle::random_instance(rng, 12, 10, 5, 50);
        auto r = elect(in);
        ASSERT_TRUE(check_pjr(in, r.committee)) << "iteration " << iter;
        expect_conservation(in, r);
    }
}

TEST(Elect, ZeroStakeNominatorNeverChangesCommittee)
{
    std::mt19937_64 rng(25);
    for (int iter = 0; iter < 300; ++iter) {
        auto in = oracle::random_instance(rng, 8, 8, 4, 100);
        auto base = elect(in).committee;
        auto with_zero = in;
        std::vector<CandidateId> approvals;
        for (const auto& c : in.candidates)
            if (rng() % 2)
                approvals.push_back(c);
        with_zero.nominators.push_back({"zero", 0, approvals});
        ASSERT_EQ(elect(with_zero).committee, base);
    }
}

TEST(CheckPjr, AgreesWithBruteForceDefinition)
{
    // cross-check the bitmask checker against a set-based restatement
    std::mt19937_64 rng(26);
    for (int iter = 0; iter < 300; ++iter) {
        auto in = oracle::random_instance(rng, 7, 6, 3, 20);
        std::vector<CandidateId> committee = in.candidates;
        std::shuffle(committee.begin(), committee.end(), rng);
        committee.resize(in.committee_size);
        ASSERT_EQ(check_pjr(in, committee), oracle::pjr_by_sets(in, committee)) << iter;
    }
}
