// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <relaylab/common.hpp>

#include <map>
#include <string>
#include <vector>

namespace relaylab::econ {

// Yearly staker inflation I(x) as a fraction of supply:
//   x <= x*: I0 + (i*x* - I0) * x / x*
//   x >  x*: I0 + (i*x* - I0) * 2^((x* - x) / decay)
// The stakers' average interest rate is I(x) / x. The scheduled yearly mint is
// i* x* of the supply at the start of the year; the part not paid to stakers
// goes to the treasury.
struct IssuanceParams {
    Ratio target_staking{1, 2};
    Ratio ideal_interest{1, 5};
    Ratio base_inflation{1, 40};
    Ratio decay{1, 20};
    uint32_t eras_per_year = 365;

    void validate() const;
};

// I(x) scaled by 10^12 (parts per trillion of supply per year).
uint64_t staker_inflation_ppt(Ratio staking_rate, const IssuanceParams& p);

struct EraPayout {
    uint64_t minted = 0;
    uint64_t stakers = 0;
    uint64_t treasury = 0;
};

// Era `era_in_year` (0-based) of a year whose starting supply is
// `supply_at_year_start`. Mints of the eras of one year sum to exactly
// floor(i* x* supply).
EraPayout era_payout(Ratio staking_rate, const IssuanceParams& p, uint64_t supply_at_year_start, uint32_t era_in_year);

enum class PayableAction { parachain_block_validated, relay_block_produced, uncle_referenced, uncle_produced };
uint32_t points_for(PayableAction a);

// Per-era validator points and the proportional split of the stakers' payout.
class PointsLedger {
public:
    explicit PointsLedger(std::vector<std::string> validators = {});

    void award(const std::string& validator, PayableAction action);
    uint64_t points(const std::string& validator) const;
    uint64_t total_points() const noexcept { return total_; }

    // floor-proportional slot payouts; the rounding remainder is returned
    // separately and goes to the treasury
    std::map<std::string, uint64_t> distribute(uint64_t stakers_payout, uint64_t& remainder) const;

private:
    std::map<std::string, uint64_t> points_;
    uint64_t total_ = 0;
};

struct Support {
    std::string validator;
    uint64_t own_stake = 0;
    std::map<std::string, uint64_t> nominators; // stake of each nominator in this support

    uint64_t total() const;
};

struct RewardSplit {
    uint64_t commission = 0;
    std::map<std::string, uint64_t> stake_shares; // includes the validator; rounding goes to it

    uint64_t validator_total(const std::string& validator) const;
    uint64_t total() const;
};

RewardSplit split_reward(uint64_t slot_payout, const Support& support, Ratio commission);

struct SlashOutcome {
    std::map<std::string, uint64_t> losses;
    uint64_t total = 0;
    uint64_t reporter_reward = 0;
    uint64_t to_treasury = 0;
    uint64_t burned = 0;
    Support remaining;
};

struct SlashParams {
    Ratio treasury_share{1, 2};
    Ratio reporter_share{1, 10};
};

// Every staker in the offender's support loses floor(fraction * stake).
SlashOutcome slash(const std::string& offender, Ratio fraction, const std::map<std::string, Support>& supports,
                   const SlashParams& params = {});

struct Resources {
    uint64_t length = 0;
    uint64_t time = 0;
    uint64_t memory = 0;

    Resources& operator+=(const Resources& o)
    {
        length += o.length;
        time += o.time;
        memory += o.memory;
        return *this;
    }
    bool fits(const Resources& limit) const
    {
        return length <= limit.length && time <= limit.time && memory <= limit.memory;
    }
};

enum class Priority { regular, operational };

struct FeeSchedule {
    std::map<uint32_t, uint64_t> type_base; // by extrinsic type code
    uint64_t length_coef = 1;
    uint64_t weight_coef = 1;
    Ratio target_fullness{1, 4};
    Ratio producer_share{1, 5};
    uint64_t multiplier = unit; // fixed point, `unit` == 1.0

    static constexpr uint64_t unit = 1'000'000'000'000ULL;
    static constexpr uint64_t min_multiplier = unit / 1'000'000;

    double multiplier_value() const { return static_cast<double>(multiplier) / static_cast<double>(unit); }
};

uint64_t fee(uint32_t type, const Resources& r, const FeeSchedule& s);

// m' = m * (1 + (fullness - target) / 3000). With target 1/4 and fullness in
// [0, 1] the per-block change stays within 1/4000 of m.
FeeSchedule update_multiplier(FeeSchedule s, Ratio fullness);

struct BlockLimits {
    Resources max{5'000'000, 2'000'000'000, 64ULL << 20};
    Ratio regular_share{3, 4};

    Resources regular_max() const;
};

struct QueuedExtrinsic {
    size_t id = 0; // caller's handle
    Priority priority = Priority::regular;
    Resources estimate;
};

// Operational first, then arrival order. Regular extrinsics share the
// regular budget; operational ones may use the whole block.
std::vector<size_t> enforce_block_limits(const std::vector<QueuedExtrinsic>& queue, const BlockLimits& limits);

// Regular extrinsics larger than the regular budget can never be included.
bool admissible(const QueuedExtrinsic& e, const BlockLimits& limits);

} // namespace relaylab::econ
