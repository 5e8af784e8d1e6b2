// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <relaylab/npos.hpp>

#include <algorithm>
#include <bit>
#include <limits>
#include <optional>
#include <set>

#include <boost/multiprecision/cpp_int.hpp>

namespace relaylab::npos {

using boost::multiprecision::cpp_rational;

void ElectionInstance::validate() const
{
    if (committee_size == 0)
        throw Error(ErrorKind::config, "committee size must be at least 1");
    std::set<CandidateId> cands(candidates.begin(), candidates.end());
    if (cands.size() != candidates.size())
        throw Error(ErrorKind::config, "duplicate candidate id");
    if (cands.size() < committee_size)
        throw Error(ErrorKind::instance_infeasible,
                    "fewer candidates (" + std::to_string(cands.size()) + ") than seats (" +
                        std::to_string(committee_size) + ")");
    for (const auto& n : nominators)
        for (const auto& a : n.approvals)
            if (!cands.contains(a))
                throw Error(ErrorKind::config, "nominator " + n.id + " approves unknown candidate " + a);
}

std::map<CandidateId, uint64_t> ElectionResult::supports() const
{
    std::map<CandidateId, uint64_t> res;
    for (const auto& c : committee)
        res[c] = 0;
    for (const auto& [edge, amount] : distribution)
        res[edge.second] += amount;
    return res;
}

uint64_t ElectionResult::min_support() const
{
    auto s = supports();
    uint64_t m = std::numeric_limits<uint64_t>::max();
    for (const auto& [c, v] : s)
        m = std::min(m, v);
    return s.empty() ? 0 : m;
}

namespace {

// Dense view of an instance: candidates sorted by id, approvals deduplicated.
struct Indexed {
    std::vector<CandidateId> candidates;
    std::map<CandidateId, size_t> index;
    std::vector<uint64_t> stake;
    std::vector<std::vector<size_t>> approvals;

    explicit Indexed(const ElectionInstance& in)
        : candidates(in.candidates)
    {
        std::sort(candidates.begin(), candidates.end());
        for (size_t i = 0; i < candidates.size(); ++i)
            index[candidates[i]] = i;
        for (const auto& n : in.nominators) {
            stake.push_back(n.stake);
            std::vector<size_t> a;
            for (const auto& c : n.approvals)
                a.push_back(index.at(c));
            std::sort(a.begin(), a.end());
            a.erase(std::unique(a.begin(), a.end()), a.end());
            approvals.push_back(std::move(a));
        }
    }
};

std::vector<bool> membership(const Indexed& ix, std::span<const CandidateId> committee)
{
    std::vector<bool> in(ix.candidates.size(), false);
    for (const auto& c : committee) {
        auto it = ix.index.find(c);
        if (it == ix.index.end())
            throw Error(ErrorKind::config, "committee member " + c + " is not a candidate");
        in[it->second] = true;
    }
    return in;
}

// Per-nominator amounts over that nominator's elected approvals.
struct Assignment {
    std::vector<std::vector<size_t>> targets;
    std::vector<std::vector<uint64_t>> amounts;
    std::vector<uint64_t> support;
};

Assignment empty_assignment(const Indexed& ix, const std::vector<bool>& elected)
{
    Assignment a;
    a.support.assign(ix.candidates.size(), 0);
    for (const auto& appr : ix.approvals) {
        std::vector<size_t> t;
        for (auto c : appr)
            if (elected[c])
                t.push_back(c);
        a.amounts.emplace_back(t.size(), 0);
        a.targets.push_back(std::move(t));
    }
    return a;
}

// One unit at a time to the backed validator with the lowest support, ties by lowest id.
void give_remainder(Assignment& a, size_t n, uint64_t remainder)
{
    auto& t = a.targets[n];
    for (; remainder > 0; --remainder) {
        size_t best = 0;
        for (size_t i = 1; i < t.size(); ++i)
            if (a.support[t[i]] < a.support[t[best]])
                best = i;
        a.amounts[n][best] += 1;
        a.support[t[best]] += 1;
    }
}

ElectionResult to_result(const ElectionInstance& in, const Indexed& ix, const std::vector<bool>& elected,
                         const Assignment& a)
{
    ElectionResult r;
    for (size_t c = 0; c < ix.candidates.size(); ++c)
        if (elected[c])
            r.committee.push_back(ix.candidates[c]);
    for (size_t n = 0; n < a.targets.size(); ++n)
        for (size_t i = 0; i < a.targets[n].size(); ++i)
            if (a.amounts[n][i] > 0)
                r.distribution[{in.nominators[n].id, ix.candidates[a.targets[n][i]]}] += a.amounts[n][i];
    return r;
}

Assignment from_result(const ElectionInstance& in, const Indexed& ix, const std::vector<bool>& elected,
                       const ElectionResult& r)
{
    auto a = empty_assignment(ix, elected);
    for (size_t n = 0; n < a.targets.size(); ++n)
        for (size_t i = 0; i < a.targets[n].size(); ++i) {
            auto it = r.distribution.find({in.nominators[n].id, ix.candidates[a.targets[n][i]]});
            if (it != r.distribution.end()) {
                a.amounts[n][i] = it->second;
                a.support[a.targets[n][i]] += it->second;
            }
        }
    return a;
}

// Integer water-filling of nominator n's stake over its targets given the other
// nominators' contributions.
void water_fill(Assignment& a, size_t n, uint64_t stake)
{
    auto& t = a.targets[n];
    auto& amt = a.amounts[n];
    std::vector<uint64_t> other(t.size());
    for (size_t i = 0; i < t.size(); ++i) {
        a.support[t[i]] -= amt[i];
        other[i] = a.support[t[i]];
        amt[i] = 0;
    }
    std::vector<size_t> order(t.size());
    for (size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
        return other[x] != other[y] ? other[x] < other[y] : t[x] < t[y];
    });
    unsigned __int128 acc = stake;
    uint64_t level = 0;
    size_t filled = 0;
    for (size_t j = 0; j < order.size(); ++j) {
        acc += other[order[j]];
        auto lvl = static_cast<uint64_t>(acc / (j + 1));
        if (j + 1 == order.size() || lvl <= other[order[j + 1]]) {
            level = lvl;
            filled = j + 1;
            break;
        }
    }
    uint64_t used = 0;
    for (size_t j = 0; j < filled; ++j) {
        auto i = order[j];
        amt[i] = level - other[i];
        used += amt[i];
    }
    for (size_t i = 0; i < t.size(); ++i)
        a.support[t[i]] += amt[i];
    give_remainder(a, n, stake - used);
}

uint64_t local_min(const Assignment& a, size_t n)
{
    uint64_t m = std::numeric_limits<uint64_t>::max();
    for (auto c : a.targets[n])
        m = std::min(m, a.support[c]);
    return m;
}

void star_balance(Assignment& a, const Indexed& ix, uint64_t tolerance)
{
    constexpr int max_passes = 10000;
    for (int pass = 0; pass < max_passes; ++pass) {
        bool improved = false;
        for (size_t n = 0; n < a.targets.size(); ++n) {
            if (a.targets[n].size() < 2)
                continue;
            auto before = local_min(a, n);
            auto saved = a.amounts[n];
            water_fill(a, n, ix.stake[n]);
            auto after = local_min(a, n);
            if (after < before) {
                // the integer remainder can only shuffle units; never accept a loss
                for (size_t i = 0; i < saved.size(); ++i) {
                    a.support[a.targets[n][i]] -= a.amounts[n][i];
                    a.support[a.targets[n][i]] += saved[i];
                }
                a.amounts[n] = saved;
                continue;
            }
            if (after - before > tolerance)
                improved = true;
        }
        if (!improved)
            return;
    }
}

} // namespace

namespace {

struct PhragmenRun {
    std::vector<bool> elected;
    std::vector<cpp_rational> load;
    std::vector<std::map<size_t, cpp_rational>> edge_load;
};

PhragmenRun run_phragmen(const Indexed& ix, size_t seats)
{
    PhragmenRun run;
    run.load.assign(ix.stake.size(), cpp_rational(0));
    run.edge_load.resize(ix.stake.size());
    run.elected.assign(ix.candidates.size(), false);
    std::vector<std::vector<size_t>> backers(ix.candidates.size());
    for (size_t n = 0; n < ix.approvals.size(); ++n)
        if (ix.stake[n] > 0)
            for (auto c : ix.approvals[n])
                backers[c].push_back(n);

    for (size_t round = 0; round < seats; ++round) {
        std::optional<size_t> best;
        cpp_rational best_score;
        for (size_t c = 0; c < ix.candidates.size(); ++c) {
            if (run.elected[c] || backers[c].empty())
                continue;
            cpp_rational num(1);
            cpp_rational den(0);
            for (auto n : backers[c]) {
                num += run.load[n] * ix.stake[n];
                den += ix.stake[n];
            }
            cpp_rational score = num / den;
            if (!best || score < best_score) {
                best = c;
                best_score = score;
            }
        }
        if (!best) {
            // only unbacked candidates remain; fill by lowest id
            for (size_t c = 0; c < ix.candidates.size(); ++c)
                if (!run.elected[c]) {
                    run.elected[c] = true;
                    break;
                }
            continue;
        }
        run.elected[*best] = true;
        for (auto n : backers[*best]) {
            run.edge_load[n][*best] = best_score - run.load[n];
            run.load[n] = best_score;
        }
    }
    return run;
}

} // namespace

std::vector<CandidateId> phragmen_committee(const ElectionInstance& instance)
{
    instance.validate();
    Indexed ix(instance);
    auto run = run_phragmen(ix, instance.committee_size);
    std::vector<CandidateId> res;
    for (size_t c = 0; c < ix.candidates.size(); ++c)
        if (run.elected[c])
            res.push_back(ix.candidates[c]);
    return res;
}

ElectionResult elect(const ElectionInstance& instance)
{
    instance.validate();
    uint64_t total = 0;
    for (const auto& n : instance.nominators)
        total += n.stake;
    if (total == 0)
        throw Error(ErrorKind::instance_infeasible, "total stake is zero");

    Indexed ix(instance);
    auto run = run_phragmen(ix, instance.committee_size);

    // initial split follows the Phragmén loads: f(n, c) = stake_n * edge_load / load_n
    auto a = empty_assignment(ix, run.elected);
    std::vector<uint64_t> remainder(ix.stake.size(), 0);
    for (size_t n = 0; n < a.targets.size(); ++n) {
        uint64_t used = 0;
        for (size_t i = 0; i < a.targets[n].size(); ++i) {
            auto it = run.edge_load[n].find(a.targets[n][i]);
            if (it == run.edge_load[n].end() || run.load[n] == 0)
                continue;
            cpp_rational share = it->second / run.load[n] * ix.stake[n];
            auto amount = static_cast<uint64_t>(boost::multiprecision::numerator(share) /
                                                boost::multiprecision::denominator(share));
            a.amounts[n][i] = amount;
            a.support[a.targets[n][i]] += amount;
            used += amount;
        }
        remainder[n] = ix.stake[n] - used;
    }
    for (size_t n = 0; n < a.targets.size(); ++n)
        if (!a.targets[n].empty())
            give_remainder(a, n, remainder[n]);
    star_balance(a, ix, 1);
    return to_result(instance, ix, run.elected, a);
}

ElectionResult balance_distribution(const ElectionInstance& instance, std::span<const CandidateId> committee)
{
    instance.validate();
    Indexed ix(instance);
    auto elected = membership(ix, committee);
    auto a = empty_assignment(ix, elected);
    for (size_t n = 0; n < a.targets.size(); ++n) {
        auto k = a.targets[n].size();
        if (k == 0)
            continue;
        for (size_t i = 0; i < k; ++i) {
            a.amounts[n][i] = ix.stake[n] / k;
            a.support[a.targets[n][i]] += ix.stake[n] / k;
        }
    }
    for (size_t n = 0; n < a.targets.size(); ++n)
        if (!a.targets[n].empty())
            give_remainder(a, n, ix.stake[n] % a.targets[n].size());
    star_balance(a, ix, 1);
    return to_result(instance, ix, elected, a);
}

ElectionResult rebalance(const ElectionInstance& instance, ElectionResult start, uint64_t tolerance)
{
    instance.validate();
    Indexed ix(instance);
    auto elected = membership(ix, start.committee);
    auto a = from_result(instance, ix, elected, start);
    for (size_t n = 0; n < a.targets.size(); ++n) {
        uint64_t sum = 0;
        for (auto v : a.amounts[n])
            sum += v;
        if (!a.targets[n].empty() && sum != ix.stake[n])
            throw Error(ErrorKind::config, "distribution does not conserve stake of " + instance.nominators[n].id);
    }
    star_balance(a, ix, tolerance);
    return to_result(instance, ix, elected, a);
}

bool check_pjr(const ElectionInstance& instance, std::span<const CandidateId> committee, PjrCap cap)
{
    if (instance.nominators.size() > cap.max_nominators || instance.candidates.size() > cap.max_candidates ||
        instance.committee_size > cap.max_committee)
        throw Error(ErrorKind::cap_exceeded, "instance exceeds the exact PJR enumeration cap");
    instance.validate();
    Indexed ix(instance);
    auto in_committee = membership(ix, committee);
    uint32_t committee_mask = 0;
    for (size_t c = 0; c < in_committee.size(); ++c)
        if (in_committee[c])
            committee_mask |= 1u << c;
    std::vector<uint32_t> approval_mask(ix.approvals.size(), 0);
    unsigned __int128 total = 0;
    for (size_t n = 0; n < ix.approvals.size(); ++n) {
        for (auto c : ix.approvals[n])
            approval_mask[n] |= 1u << c;
        total += ix.stake[n];
    }
    const auto seats = static_cast<unsigned>(instance.committee_size);
    const uint32_t subsets = 1u << ix.approvals.size();
    for (uint32_t s = 1; s < subsets; ++s) {
        unsigned __int128 group_stake = 0;
        uint32_t inter = ~0u;
        uint32_t uni = 0;
        for (size_t n = 0; n < ix.approvals.size(); ++n)
            if (s & (1u << n)) {
                group_stake += ix.stake[n];
                inter &= approval_mask[n];
                uni |= approval_mask[n];
            }
        auto agreed = static_cast<unsigned>(std::popcount(inter));
        auto represented = static_cast<unsigned>(std::popcount(uni & committee_mask));
        for (unsigned t = 1; t <= seats && t <= agreed; ++t)
            if (group_stake * seats >= total * t && represented < t)
                return false;
    }
    return true;
}

} // namespace relaylab::npos
