// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <relaylab/econ.hpp>
#include <relaylab/gov.hpp>
#include <relaylab/parachain.hpp>

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

// Seeded discrete-event simulation of a relay chain with its parachains.
// Time is integer ticks. Every message is delivered after a delay drawn
// uniformly from [1, delta], or exactly delta on edges an adversary controls.
namespace relaylab::sim {

enum class Script {
    equivocate,        // two blocks per led slot, each half sees one; a second vote for the parent of each target
    withhold_pieces,   // never sends erasure pieces or answers piece requests
    invalid_candidate, // attests anything as an assignee and vouches for anything as a checker
    censor,            // leaves user transactions and parachain candidates out of its blocks
    delay_maximal,     // every edge touching the node takes exactly delta
    clock_drift,       // runs its clock at adversary.drift_ppm
    finality_stall,    // silent in finality voting for adversary.stall_rounds rounds
    split_brain,       // asynchronous partition: each half of the honest nodes sees its own twin of every adversary
};
const char* to_string(Script s);
Script parse_script(std::string_view s); // throws config

struct NominatorConfig {
    uint32_t count = 24;
    uint64_t stake_min = 1'000'000;
    uint64_t stake_max = 10'000'000;
    uint32_t approvals = 3;
    Ratio honest_stake{3, 4}; // share of nominator stake backing honest candidates only
    uint64_t candidate_self_stake = 1'000'000;
};

struct ParachainConfig {
    uint32_t count = 0;
    std::vector<para::StvfKind> kinds; // per parachain; defaults to counter
    Ratio message_rate{1, 2};         // chance a collated block sends one message
    std::set<xcmp::ParaId> adversarial_collators;
    uint32_t checker_base = 2;
    uint64_t availability_timeout_slots = 6;
    size_t max_batches = 8;
};

struct FishermenConfig {
    uint32_t count = 0;
    Ratio report_probability{1, 1};
    uint64_t delay_ticks = 0;
    uint64_t bond = 1000;
};

struct AdversaryConfig {
    uint32_t count = 0; // adversarial validators, chosen by seed from the committee
    std::set<Script> scripts;
    int64_t drift_ppm = 50'000;
    uint64_t stall_rounds = 10;
    bool rig_checkers = false;  // honest validators never win the checker lottery
    bool capture_group = false; // adversaries fill the group of parachain 0
    bool allow_out_of_model = false;
};

struct ClockConfig {
    int64_t max_drift_ppm = 0;
    int64_t max_offset = 0;      // initial offset bound for honest nodes, ticks
    uint64_t sync_gap_slots = 0; // 0 disables relative-time synchronisation
    std::optional<uint64_t> tolerance; // timestamp tolerance; default covers offset and drift
};

struct WorkloadConfig {
    uint32_t users = 4;
    Ratio transfers_per_slot{1, 1};
    uint64_t user_balance = 1'000'000'000;
};

struct EconomicsConfig {
    econ::IssuanceParams issuance;
    uint64_t slots_per_era = 100;
    uint64_t other_supply = 0; // stake-free holdings in the supply
    Ratio commission{1, 10};
    Ratio invalidity_slash{1, 1};
    Ratio equivocation_slash{1, 10};
};

struct Referendum {
    uint64_t slot = 0;
    gov::Bias bias = gov::Bias::simple_majority;
    Ratio turnout{1, 2};
    Ratio aye_share{2, 3};
    std::optional<uint32_t> set_code;
};

struct ScenarioConfig {
    std::string name = "scenario";
    uint64_t seed = 1;
    uint32_t validators = 4;
    std::optional<uint32_t> candidates; // default validators + 2
    NominatorConfig nominators;
    uint64_t slots = 200;
    uint64_t slot_ticks = 20;
    uint64_t delta = 4;
    uint64_t epoch_length = 50;
    Ratio leader_rate{1, 4}; // primary lottery threshold
    bool finality = true;
    ParachainConfig parachains;
    FishermenConfig fishermen;
    AdversaryConfig adversary;
    ClockConfig clock;
    WorkloadConfig workload;
    EconomicsConfig economics;
    std::vector<Referendum> referenda;
    uint64_t common_prefix_depth = 20;
    uint64_t growth_floor = 0; // minimum best-chain growth over any 100-slot window, blocks

    void validate() const; // throws config
    uint64_t tolerance() const;
    static ScenarioConfig from_json(std::string_view text); // throws config
    std::string to_json() const;
};

struct Summary {
    uint64_t count = 0;
    uint64_t min = 0;
    uint64_t p50 = 0;
    uint64_t p95 = 0;
    uint64_t max = 0;
    uint64_t mean_milli = 0; // mean * 1000, floored

    static Summary of(std::vector<uint64_t> xs);
};

struct SlashEvent {
    uint64_t tick = 0;
    std::string offender;
    std::string reason;
    uint64_t amount = 0;
};

struct ConflictAudit {
    uint64_t conflicts = 0;      // pairs of finalized blocks on different branches
    bool detected = false;       // audit found at least a third of the weight
    bool same_round = false;
    uint64_t culprit_weight = 0;
    uint64_t total_weight = 0;
    std::vector<uint32_t> culprits;
};

struct MetricsReport {
    std::string scenario;
    uint64_t seed = 0;
    uint64_t slots = 0;
    uint64_t ticks = 0;
    uint32_t validators = 0;
    std::vector<uint32_t> adversaries;
    bool out_of_model = false;

    // chain
    uint64_t blocks_produced = 0;
    uint64_t primary_blocks = 0;
    uint64_t best_height = 0;      // reference honest node
    uint64_t finalized_height = 0; // lowest across honest nodes
    uint64_t honest_blocks_on_chain = 0;
    uint64_t chain_length = 0;
    uint64_t fork_blocks = 0;      // produced blocks off the reference chain
    uint64_t block_equivocations = 0;
    Summary finality_lag; // slots from production to first honest finalization
    uint64_t epochs = 0;
    uint64_t epochs_without_honest_primary = 0;
    uint64_t min_epoch_growth = 0;
    uint64_t min_window_growth = 0; // over 100-slot windows
    uint64_t common_prefix_samples = 0;
    uint64_t common_prefix_violations = 0;

    // finality
    uint64_t finality_rounds = 0;
    uint64_t vote_equivocations = 0; // distinct (voter, round, stage)
    uint64_t safety_alarms = 0;
    ConflictAudit safety;

    // parachains
    uint64_t candidates_included = 0;
    uint64_t invalid_included = 0;
    uint64_t invalid_finalized = 0;
    uint64_t invalid_finalized_with_honest_checker = 0;
    uint64_t reverted_blocks = 0;
    uint64_t disputes = 0;
    uint64_t unavailable = 0;
    uint64_t min_attester_support = 0;
    size_t attestation_threshold = 0;

    // messaging
    uint64_t xcmp_sent = 0;
    uint64_t xcmp_delivered = 0;
    Summary xcmp_latency; // relay blocks from sender inclusion to receiver inclusion
    uint64_t xcmp_fifo_violations = 0;
    uint64_t xcmp_batch_violations = 0;
    uint64_t xcmp_watermark_violations = 0;
    uint64_t xcmp_fork_violations = 0;

    // transactions
    uint64_t txs_submitted = 0;
    uint64_t txs_included = 0;
    Summary inclusion_latency; // slots

    // relative time
    uint64_t sync_epochs = 0;
    uint64_t max_sync_spread = 0; // ticks between honest slot-start estimates

    // network
    uint64_t messages_sent = 0;
    uint64_t messages_delivered = 0;
    uint64_t messages_in_flight = 0;
    uint64_t messages_partitioned = 0;
    uint64_t max_delay = 0;

    // economics
    uint64_t eras = 0;
    uint64_t minted = 0;
    uint64_t staker_rewards = 0;
    uint64_t treasury = 0;
    uint64_t burned = 0;
    uint64_t supply_start = 0;
    uint64_t supply_end = 0;
    std::vector<SlashEvent> slashes;
    uint64_t slash_total = 0;

    // governance
    std::vector<bool> referenda_approved;
    uint32_t code_variant = 0;

    std::map<std::string, bool> violations;
    std::string trace_hash;

    bool any_violation() const;
    std::string to_json() const;
    std::string to_csv() const; // header line plus one row
};

// One line of JSON per processed event.
using TraceSink = std::function<void(const std::string& line)>;

MetricsReport run(const ScenarioConfig& config, const TraceSink& trace = {});

// Partition of the validators among the parachains: shuffled by
// hash("rotation" || randomness || u64 era), groups of floor(n / p) with the
// remainder handed out one each to the first groups.
std::map<xcmp::ParaId, std::vector<uint32_t>> rotate_assignments(uint64_t era, uint32_t validators,
                                                                 uint32_t parachains, const Digest& randomness);

} // namespace relaylab::sim
