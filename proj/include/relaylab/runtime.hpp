// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <relaylab/econ.hpp>
#include <relaylab/parachain.hpp>
#include <relaylab/trie.hpp>

#include <functional>
#include <map>
#include <optional>

// Relay-chain state machine.
//
// State keys (ASCII, decimal ids):
//   bal/<acct>  u64      nonce/<acct>  u64      bond/<acct>  u64
//   time        u64      code          u32      mult         u64 fee multiplier
//   treasury    u64      para/<id>     head data of the last included candidate
//   rec/<kind>/<acct>/<nonce>          raw arguments of calls the runtime only records
namespace relaylab::runtime {

using AccountId = uint32_t;

enum class Call : uint8_t {
    transfer,
    bond,
    nominate,
    validate,
    vote,
    report,
    bid,
    endorse,
    set_code,
    remark,
    // inherents
    timestamp,
    candidates,
};

const char* to_string(Call c);
bool is_inherent(Call c);
econ::Priority priority_of(Call c);

struct Extrinsic {
    Call call = Call::remark;
    AccountId signer = 0;
    uint64_t nonce = 0;
    Bytes args;
    crypto::Signature signature; // zero for inherents

    Bytes signing_payload() const;
    Bytes encode() const;
    static Extrinsic decode(ByteView data);
    Digest hash() const { return relaylab::hash(encode()); }
};

Extrinsic make_transfer(AccountId to, uint64_t amount);
Extrinsic make_bond(uint64_t amount);
Extrinsic make_set_code(uint32_t variant);
Extrinsic make_remark(std::string_view text);
Extrinsic make_timestamp(uint64_t time);
Extrinsic make_candidates(const std::vector<para::CandidateReceipt>& receipts);
// fills signer, nonce and signature
Extrinsic signed_by(Extrinsic e, AccountId signer, uint64_t nonce, const crypto::SecretKey& secret);

std::vector<para::CandidateReceipt> candidates_of(const Extrinsic& e);
uint64_t timestamp_of(const Extrinsic& e);

enum class Reject {
    bad_signature,
    stale_nonce,
    future_nonce,
    insufficient_funds,
    over_resource,
    bad_origin,
    inherent_outside_block,
    malformed,
};
const char* to_string(Reject r);

struct Genesis {
    std::map<AccountId, uint64_t> balances;
    std::map<AccountId, crypto::PublicKey> keys;
    AccountId governance = 0; // only origin allowed to call set_code
    econ::BlockLimits limits;
    econ::FeeSchedule fees;
    // per code variant: base fee by call
    std::vector<std::map<uint32_t, uint64_t>> code_variants{
        {{0, 1000}, {1, 1500}, {2, 800}, {3, 800}, {4, 500}, {5, 2000}, {6, 1200}, {7, 300}, {8, 0}, {9, 200}},
        {{0, 2500}, {1, 1500}, {2, 800}, {3, 800}, {4, 500}, {5, 2000}, {6, 1200}, {7, 300}, {8, 0}, {9, 200}},
    };

    // {"governance": id, "accounts": [{"id": n, "seed": "...", "balance": n}, ...]}
    // Keys are generated from the seeds into `registry`.
    static Genesis from_json(const std::string& text, crypto::KeyRegistry& registry);
};

struct Body {
    AccountId author = 0; // receives the producer share of fees
    std::vector<Extrinsic> extrinsics;

    Digest extrinsics_root() const;
};

class Runtime {
public:
    Runtime(Genesis genesis, const crypto::KeyRegistry& registry);

    trie::StateTrie genesis_state() const;
    const Genesis& genesis() const { return genesis_; }

    econ::Resources estimate(const Extrinsic& e) const;
    uint64_t fee_of(const trie::StateTrie& state, const Extrinsic& e) const;

    std::optional<Reject> validate_extrinsic(const trie::StateTrie& state, const Extrinsic& e) const;

    // Inherents first, then transactions, in body order. Throws invalid_block on
    // any failing extrinsic or misplaced inherent.
    trie::StateTrie execute(const trie::StateTrie& state, const Body& body) const;
    // execute() plus the root check against the header's state root
    trie::StateTrie apply_block(const trie::StateTrie& state, const Body& body, const Digest& expected_root) const;

    static uint64_t balance(const trie::StateTrie& s, AccountId a);
    static uint64_t nonce(const trie::StateTrie& s, AccountId a);
    static uint64_t bonded(const trie::StateTrie& s, AccountId a);
    static uint32_t code_variant(const trie::StateTrie& s);
    static uint64_t time(const trie::StateTrie& s);
    static uint64_t treasury(const trie::StateTrie& s);
    static uint64_t multiplier(const trie::StateTrie& s);
    static std::optional<Bytes> para_head(const trie::StateTrie& s, xcmp::ParaId id);
    // sum of balances, bonds and the treasury
    static uint64_t total_issuance(const trie::StateTrie& s);

    // One transaction on its own; the fee is added to `fee_total` and left
    // for the end-of-block split. Throws rejected.
    trie::StateTrie apply_transaction(const trie::StateTrie& s, const Extrinsic& e, uint64_t& fee_total) const;

private:
    Genesis genesis_;
    const crypto::KeyRegistry* registry_;
};

// Local acceptance of a block's inherents: exactly one timestamp inherent in
// first position, within `tolerance` of the local slot start, and every
// candidate accepted by `candidate_ok`.
bool inherent_check(const Body& body, uint64_t local_slot_start, uint64_t tolerance,
                    const std::function<bool(const para::CandidateReceipt&)>& candidate_ok);

// Pending transactions. Per signer, nonces are taken in order starting from
// the state nonce; operational calls go ahead of regular ones.
class TransactionQueue {
public:
    std::optional<Reject> submit(const Runtime& rt, const trie::StateTrie& state, Extrinsic e);
    // picks a sequence that applies cleanly on `state` and fits the block limits
    std::vector<Extrinsic> select(const Runtime& rt, const trie::StateTrie& state) const;
    // drops everything already included or made stale by `state`
    void prune(const trie::StateTrie& state);
    size_t size() const;

private:
    std::map<AccountId, std::map<uint64_t, Extrinsic>> pending_;
    uint64_t arrivals_ = 0;
    std::map<Digest, uint64_t> arrival_;
};

} // namespace relaylab::runtime
