// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <relaylab/econ.hpp>

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>

namespace relaylab::econ {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

namespace {

constexpr uint64_t ppt = 1'000'000'000'000ULL;

cpp_rational rational(Ratio r) { return cpp_rational(cpp_int(r.num), cpp_int(r.den)); }

uint64_t floor_u64(const cpp_rational& v)
{
    cpp_int q = boost::multiprecision::numerator(v) / boost::multiprecision::denominator(v);
    return q.convert_to<uint64_t>();
}

uint64_t mul_div(uint64_t a, uint64_t b, uint64_t c)
{
    return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b / c);
}

} // namespace

void IssuanceParams::validate() const
{
    auto bad = [](Ratio r) { return r.den == 0; };
    if (bad(target_staking) || bad(ideal_interest) || bad(base_inflation) || bad(decay))
        throw Error(ErrorKind::config, "zero denominator in issuance parameters");
    if (target_staking.num == 0 || target_staking.num >= target_staking.den)
        throw Error(ErrorKind::config, "target staking rate must lie in (0, 1)");
    if (ideal_interest.num == 0 || decay.num == 0)
        throw Error(ErrorKind::config, "interest and decay must be positive");
    if (eras_per_year == 0)
        throw Error(ErrorKind::config, "eras_per_year must be positive");
    if (rational(base_inflation) > rational(ideal_interest) * rational(target_staking))
        throw Error(ErrorKind::config, "base inflation exceeds the ideal staker inflation");
}

uint64_t staker_inflation_ppt(Ratio staking_rate, const IssuanceParams& p)
{
    auto x = rational(staking_rate);
    auto xs = rational(p.target_staking);
    auto i0 = rational(p.base_inflation);
    auto top = rational(p.ideal_interest) * xs;
    if (x <= xs)
        return floor_u64((i0 + (top - i0) * x / xs) * ppt);
    long double exponent = (xs - x).convert_to<long double>() / rational(p.decay).convert_to<long double>();
    long double factor = std::pow(2.0L, exponent);
    long double v = (i0.convert_to<long double>() + (top - i0).convert_to<long double>() * factor) * ppt;
    return static_cast<uint64_t>(std::floor(v));
}

EraPayout era_payout(Ratio staking_rate, const IssuanceParams& p, uint64_t supply_at_year_start, uint32_t era_in_year)
{
    if (staking_rate.den == 0 || staking_rate.num > staking_rate.den)
        throw Error(ErrorKind::config, "staking rate must lie in [0, 1]");
    const uint64_t eras = p.eras_per_year;
    auto yearly = rational(p.ideal_interest) * rational(p.target_staking) * cpp_rational(supply_at_year_start);
    auto cumulative = [&](uint64_t e) { return floor_u64(yearly * e / eras); };
    EraPayout out;
    out.minted = cumulative(era_in_year % eras + 1) - cumulative(era_in_year % eras);
    if (staking_rate.num > 0) {
        cpp_int v = cpp_int(staker_inflation_ppt(staking_rate, p)) * supply_at_year_start / (cpp_int(ppt) * eras);
        out.stakers = std::min(v.convert_to<uint64_t>(), out.minted);
    }
    out.treasury = out.minted - out.stakers;
    return out;
}

uint32_t points_for(PayableAction a)
{
    switch (a) {
    case PayableAction::parachain_block_validated:
        return 20;
    case PayableAction::relay_block_produced:
        return 20;
    case PayableAction::uncle_referenced:
        return 2;
    case PayableAction::uncle_produced:
        return 1;
    }
    return 0;
}

PointsLedger::PointsLedger(std::vector<std::string> validators)
{
    for (auto& v : validators)
        points_.emplace(std::move(v), 0);
}

void PointsLedger::award(const std::string& validator, PayableAction action)
{
    auto it = points_.find(validator);
    if (it == points_.end())
        throw Error(ErrorKind::unknown_validator, "unknown validator " + validator);
    it->second += points_for(action);
    total_ += points_for(action);
}

uint64_t PointsLedger::points(const std::string& validator) const
{
    auto it = points_.find(validator);
    if (it == points_.end())
        throw Error(ErrorKind::unknown_validator, "unknown validator " + validator);
    return it->second;
}

std::map<std::string, uint64_t> PointsLedger::distribute(uint64_t stakers_payout, uint64_t& remainder) const
{
    std::map<std::string, uint64_t> out;
    remainder = stakers_payout;
    if (total_ == 0)
        return out;
    for (const auto& [v, pts] : points_) {
        auto share = mul_div(stakers_payout, pts, total_);
        out[v] = share;
        remainder -= share;
    }
    return out;
}

uint64_t Support::total() const
{
    uint64_t t = own_stake;
    for (const auto& [_, s] : nominators)
        t += s;
    return t;
}

uint64_t RewardSplit::validator_total(const std::string& validator) const
{
    auto it = stake_shares.find(validator);
    return commission + (it == stake_shares.end() ? 0 : it->second);
}

uint64_t RewardSplit::total() const
{
    uint64_t t = commission;
    for (const auto& [_, v] : stake_shares)
        t += v;
    return t;
}

RewardSplit split_reward(uint64_t slot_payout, const Support& support, Ratio commission)
{
    if (commission.den == 0 || commission.num > commission.den)
        throw Error(ErrorKind::config, "commission must lie in [0, 1]");
    const uint64_t total = support.total();
    if (total == 0 && commission.num != commission.den)
        throw Error(ErrorKind::undefined_support, "support of " + support.validator + " has no stake");
    RewardSplit r;
    r.commission = commission.apply(slot_payout);
    uint64_t rest = slot_payout - r.commission;
    uint64_t given = 0;
    if (total > 0) {
        for (const auto& [n, s] : support.nominators) {
            auto share = mul_div(rest, s, total);
            r.stake_shares[n] = share;
            given += share;
        }
    }
    r.stake_shares[support.validator] += rest - given;
    return r;
}

SlashOutcome slash(const std::string& offender, Ratio fraction, const std::map<std::string, Support>& supports,
                   const SlashParams& params)
{
    if (fraction.den == 0 || fraction.num == 0 || fraction.num > fraction.den)
        throw Error(ErrorKind::config, "slash fraction must lie in (0, 1]");
    auto it = supports.find(offender);
    if (it == supports.end())
        throw Error(ErrorKind::unknown_validator, "unknown offender " + offender);
    SlashOutcome out;
    out.remaining = it->second;
    auto take = [&](const std::string& who, uint64_t& stake) {
        auto loss = fraction.apply(stake);
        stake -= loss;
        out.losses[who] += loss;
        out.total += loss;
    };
    take(offender, out.remaining.own_stake);
    for (auto& [n, s] : out.remaining.nominators)
        take(n, s);
    out.reporter_reward = params.reporter_share.apply(out.total);
    out.to_treasury = params.treasury_share.apply(out.total - out.reporter_reward);
    out.burned = out.total - out.reporter_reward - out.to_treasury;
    return out;
}

uint64_t fee(uint32_t type, const Resources& r, const FeeSchedule& s)
{
    auto it = s.type_base.find(type);
    unsigned __int128 raw = (it == s.type_base.end() ? 0 : it->second);
    raw += static_cast<unsigned __int128>(s.length_coef) * r.length;
    raw += static_cast<unsigned __int128>(s.weight_coef) * r.time;
    return static_cast<uint64_t>(raw * s.multiplier / FeeSchedule::unit);
}

FeeSchedule update_multiplier(FeeSchedule s, Ratio fullness)
{
    // delta = m * (fullness - target) / 3000, computed over a common denominator
    const auto& t = s.target_fullness;
    __int128 diff = static_cast<__int128>(fullness.num) * t.den - static_cast<__int128>(t.num) * fullness.den;
    __int128 den = static_cast<__int128>(fullness.den) * t.den * 3000;
    __int128 delta = static_cast<__int128>(s.multiplier) * diff / den;
    __int128 m = static_cast<__int128>(s.multiplier) + delta;
    s.multiplier = static_cast<uint64_t>(std::max<__int128>(m, FeeSchedule::min_multiplier));
    return s;
}

Resources BlockLimits::regular_max() const
{
    return {regular_share.apply(max.length), regular_share.apply(max.time), regular_share.apply(max.memory)};
}

bool admissible(const QueuedExtrinsic& e, const BlockLimits& limits)
{
    return e.estimate.fits(e.priority == Priority::regular ? limits.regular_max() : limits.max);
}

std::vector<size_t> enforce_block_limits(const std::vector<QueuedExtrinsic>& queue, const BlockLimits& limits)
{
    std::vector<size_t> order(queue.size());
    for (size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return queue[a].priority == Priority::operational && queue[b].priority == Priority::regular;
    });
    Resources used;
    Resources regular_used;
    const auto regular_max = limits.regular_max();
    std::vector<size_t> selected;
    for (auto i : order) {
        const auto& e = queue[i];
        Resources next = used;
        next += e.estimate;
        if (!next.fits(limits.max))
            continue;
        if (e.priority == Priority::regular) {
            Resources next_regular = regular_used;
            next_regular += e.estimate;
            if (!next_regular.fits(regular_max))
                continue;
            regular_used = next_regular;
        }
        used = next;
        selected.push_back(e.id);
    }
    return selected;
}

} // namespace relaylab::econ
