// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Test-only brute-force references for the election module.

#include <relaylab/npos.hpp>

#include <algorithm>
#include <random>
#include <set>

namespace relaylab::npos::oracle {

struct Fraction {
    uint64_t num = 0;
    uint64_t den = 1;
};

inline bool less(const Fraction& a, const Fraction& b)
{
    return static_cast<unsigned __int128>(a.num) * b.den < static_cast<unsigned __int128>(b.num) * a.den;
}

// Maximin support of a fixed committee. By the supply/demand (Gale/Hall)
// condition, supports >= s are feasible iff every subset S of the committee is
// approved by nominators holding at least s * |S| stake, so the optimum is the
// minimum over S of stake(N(S)) / |S|.
inline Fraction committee_maximin(const ElectionInstance& in, const std::vector<CandidateId>& committee)
{
    Fraction best{UINT64_MAX, 1};
    const size_t k = committee.size();
    for (uint32_t mask = 1; mask < (1u << k); ++mask) {
        std::set<CandidateId> subset;
        for (size_t i = 0; i < k; ++i)
            if (mask & (1u << i))
                subset.insert(committee[i]);
        uint64_t stake = 0;
        for (const auto& n : in.nominators)
            if (std::any_of(n.approvals.begin(), n.approvals.end(), [&](const auto& a) { return subset.contains(a); }))
                stake += n.stake;
        Fraction f{stake, subset.size()};
        if (less(f, best))
            best = f;
    }
    return best;
}

inline Fraction best_maximin(const ElectionInstance& in)
{
    Fraction best{0, 1};
    auto cands = in.candidates;
    std::sort(cands.begin(), cands.end());
    std::vector<bool> pick(cands.size(), false);
    std::fill(pick.begin(), pick.begin() + static_cast<ptrdiff_t>(in.committee_size), true);
    do {
        std::vector<CandidateId> committee;
        for (size_t i = 0; i < cands.size(); ++i)
            if (pick[i])
                committee.push_back(cands[i]);
        auto v = committee_maximin(in, committee);
        if (less(best, v))
            best = v;
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return best;
}

inline ElectionInstance random_instance(std::mt19937_64& rng, size_t max_nominators, size_t max_candidates,
                                        size_t max_seats, uint64_t max_stake)
{
    ElectionInstance in;
    auto nc = 1 + rng() % max_candidates;
    for (size_t c = 0; c < nc; ++c)
        in.candidates.push_back(std::string(1, static_cast<char>('A' + c)));
    in.committee_size = 1 + rng() % std::min(max_seats, nc);
    auto nn = 1 + rng() % max_nominators;
    for (size_t n = 0; n < nn; ++n) {
        Nominator nom{"n" + std::to_string(n), 1 + rng() % max_stake, {}};
        for (const auto& c : in.candidates)
            if (rng() % 3 == 0)
                nom.approvals.push_back(c);
        if (nom.approvals.empty())
            nom.approvals.push_back(in.candidates[rng() % nc]);
        in.nominators.push_back(std::move(nom));
    }
    return in;
}

// PJR restated over explicit sets (independent of the bitmask implementation).
inline bool pjr_by_sets(const ElectionInstance& in, const std::vector<CandidateId>& committee)
{
    std::set<CandidateId> w(committee.begin(), committee.end());
    uint64_t total = 0;
    for (const auto& n : in.nominators)
        total += n.stake;
    const size_t nn = in.nominators.size();
    for (uint32_t mask = 1; mask < (1u << nn); ++mask) {
        std::set<CandidateId> inter;
        std::set<CandidateId> uni;
        uint64_t stake = 0;
        bool first = true;
        for (size_t i = 0; i < nn; ++i) {
            if (!(mask & (1u << i)))
                continue;
            const auto& n = in.nominators[i];
            std::set<CandidateId> a(n.approvals.begin(), n.approvals.end());
            stake += n.stake;
            uni.insert(a.begin(), a.end());
            if (first) {
                inter = a;
                first = false;
            } else {
                std::set<CandidateId> tmp;
                std::set_intersection(inter.begin(), inter.end(), a.begin(), a.end(), std::inserter(tmp, tmp.end()));
                inter = tmp;
            }
        }
        size_t represented = 0;
        for (const auto& c : uni)
            represented += w.contains(c);
        for (size_t t = 1; t <= in.committee_size; ++t) {
            bool cohesive = inter.size() >= t;
            bool large = static_cast<unsigned __int128>(stake) * in.committee_size >= static_cast<unsigned __int128>(total) * t;
            if (cohesive && large && represented < t)
                return false;
        }
    }
    return true;
}

} // namespace relaylab::npos::oracle
