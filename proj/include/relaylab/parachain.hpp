// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <relaylab/erasure.hpp>
#include <relaylab/xcmp.hpp>

#include <map>
#include <optional>
#include <set>

namespace relaylab::para {

using xcmp::ParaId;

// Parachain header as seen by the relay chain. Encoded with ByteWriter:
// u64 number | blob app_state | message_root | u32 n | n x (u32 dest, head) |
// u64 watermark relay | u32 watermark sender | inbox digest
struct HeadData {
    uint64_t number = 0;
    Bytes app_state;
    Digest message_root;
    std::map<ParaId, Digest> out_heads;
    xcmp::Watermark watermark;
    Digest inbox_digest; // chain over every message received so far

    Bytes encode() const;
    static HeadData decode(ByteView data);
    Digest hash() const { return relaylab::hash(encode()); }
};

struct PovBlock {
    ParaId para = 0;
    Bytes parent_head;
    Bytes payload;
    xcmp::Outgoing outgoing;
    Bytes witness;

    Bytes encode() const;
    static PovBlock decode(ByteView data);
    Digest hash() const { return relaylab::hash(encode()); }
};

enum class StvfKind { counter, ledger, adversarial };
const char* to_string(StvfKind k);
StvfKind parse_stvf(std::string_view s);

struct RelayInputs {
    const xcmp::ForkView* fork = nullptr; // relay chain up to the candidate's relay parent
    ParaId max_para = 0;
    xcmp::Blocklist blocklist;
    size_t max_batches = SIZE_MAX;
};

struct StvfResult {
    bool valid = false;
    std::string reason;
    Bytes head;
    xcmp::Outgoing outgoing;
    std::vector<xcmp::Batch> received;
};

// Toy transitions:
//   counter    : app_state u64; payload "+<n>" adds n
//   ledger     : app_state encoded balances; payload "from>to:amount;..." in order,
//                any overdraft (including double spends) is invalid
//   adversarial: every payload is invalid
StvfResult stvf_validate(StvfKind kind, const PovBlock& pov, ByteView parent_head, const RelayInputs& inputs);

Bytes counter_state(uint64_t value);
uint64_t counter_value(ByteView app_state);
Bytes ledger_state(const std::map<std::string, uint64_t>& balances);
std::map<std::string, uint64_t> ledger_balances(ByteView app_state);

HeadData genesis_head(StvfKind kind, const std::map<std::string, uint64_t>& ledger_balances = {});

struct Attestation {
    uint32_t validator = 0;
    crypto::Signature signature;
};

struct CandidateReceipt {
    ParaId para = 0;
    Digest relay_parent;
    Bytes head_data;
    Digest pov_hash;
    Digest erasure_root;
    uint32_t pieces = 0;
    std::vector<Attestation> attestations;

    // commitment signed by attesters; excludes the attestations themselves
    Digest hash() const;
    Bytes encode() const;
    static CandidateReceipt decode(ByteView data);
};

// strict majority of the assigned group
inline size_t attestation_threshold(size_t group_size) { return group_size / 2 + 1; }

struct AssignedValidator {
    uint32_t index = 0;
    const crypto::KeyPair* keys = nullptr;
    bool honest = true;
};

struct PipelineResult {
    std::optional<CandidateReceipt> receipt;
    StvfResult verdict;
    erasure::ErasurePieces pieces;
    std::vector<uint32_t> rejected_by; // honest assignees that found the block invalid
};

// Every honest assignee validates and attests only valid blocks; dishonest
// ones attest regardless. A receipt exists once the threshold is met.
PipelineResult candidate_pipeline(StvfKind kind, const PovBlock& pov, const Digest& relay_parent,
                                  const RelayInputs& inputs, std::span<const AssignedValidator> assigned,
                                  size_t total_validators);

Bytes attestation_message(const CandidateReceipt& r);

// distinct group members, valid signatures, at least the threshold of the group
bool attestations_valid(const CandidateReceipt& r, const std::map<uint32_t, crypto::PublicKey>& group,
                        const crypto::KeyRegistry& registry);

// base + 2 * invalidity reports + unavailability reports, capped at n
size_t secondary_checker_count(size_t invalidity_reports, size_t unavailability_reports, size_t base, size_t n);

Bytes checker_lottery_input(const Digest& epoch_randomness, const Digest& candidate);

// true when the VRF value falls below count / n of the output range
bool checker_selected(const crypto::VrfOutput& out, size_t count, size_t n);

std::vector<uint32_t> assign_secondary_checkers(const Digest& candidate, const Digest& epoch_randomness, size_t count,
                                                std::span<const crypto::KeyPair> validators);

enum class ReportKind { fisherman_invalid, unavailability, checker_verdict };

struct ValidityReport {
    ReportKind kind = ReportKind::fisherman_invalid;
    std::string reporter;
    Digest candidate;
    uint64_t bond = 0;
    bool claims_invalid = true;
};

struct CandidateRecord {
    std::vector<uint32_t> attesters;
    bool invalid = false;     // outcome of re-validation by the checkers
    bool reconstructible = true;
};

struct ReportEffects {
    std::vector<uint32_t> slash_validators;
    std::string reward_reporter;
    bool slash_reporter_bond = false;
    bool escalate = false;
    bool withhold_finality = false;
};

ReportEffects process_report(const ValidityReport& report, const std::map<Digest, CandidateRecord>& candidates);

} // namespace relaylab::para
