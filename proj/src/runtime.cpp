// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <relaylab/runtime.hpp>

#include <json.hpp>

#include <algorithm>
#include <set>

namespace relaylab::runtime {

namespace {

std::string key(std::string_view prefix, uint64_t id) { return std::string(prefix) + std::to_string(id); }

uint64_t get_u64(const trie::StateTrie& s, const std::string& k)
{
    auto v = trie::get(s, k);
    if (!v)
        return 0;
    ByteReader r(*v);
    return r.u64();
}

trie::StateTrie put_u64(const trie::StateTrie& s, const std::string& k, uint64_t v)
{
    return trie::put(s, k, ByteWriter().u64(v).bytes());
}

uint64_t decode_u64(ByteView args)
{
    ByteReader r(args);
    auto v = r.u64();
    if (!r.done())
        throw Error(ErrorKind::decode, "bad u64 argument");
    return v;
}

uint32_t decode_u32(ByteView args)
{
    ByteReader r(args);
    auto v = r.u32();
    if (!r.done())
        throw Error(ErrorKind::decode, "bad u32 argument");
    return v;
}

std::pair<AccountId, uint64_t> decode_transfer(ByteView args)
{
    ByteReader r(args);
    AccountId to = r.u32();
    uint64_t amount = r.u64();
    if (!r.done())
        throw Error(ErrorKind::decode, "bad transfer arguments");
    return {to, amount};
}

// amount leaving the free balance besides the fee
uint64_t spend_of(const Extrinsic& e)
{
    switch (e.call) {
    case Call::transfer: return decode_transfer(e.args).second;
    case Call::bond: return decode_u64(e.args);
    default: return 0;
    }
}

uint64_t base_time(Call c)
{
    switch (c) {
    case Call::transfer: return 20'000;
    case Call::bond: return 25'000;
    case Call::set_code: return 200'000;
    case Call::report: return 50'000;
    case Call::timestamp: return 1'000;
    case Call::candidates: return 100'000;
    default: return 10'000;
    }
}

} // namespace

const char* to_string(Call c)
{
    switch (c) {
    case Call::transfer: return "transfer";
    case Call::bond: return "bond";
    case Call::nominate: return "nominate";
    case Call::validate: return "validate";
    case Call::vote: return "vote";
    case Call::report: return "report";
    case Call::bid: return "bid";
    case Call::endorse: return "endorse";
    case Call::set_code: return "set_code";
    case Call::remark: return "remark";
    case Call::timestamp: return "timestamp";
    case Call::candidates: return "candidates";
    }
    return "?";
}

bool is_inherent(Call c) { return c == Call::timestamp || c == Call::candidates; }

econ::Priority priority_of(Call c)
{
    return c == Call::set_code || c == Call::report ? econ::Priority::operational : econ::Priority::regular;
}

const char* to_string(Reject r)
{
    switch (r) {
    case Reject::bad_signature: return "bad-signature";
    case Reject::stale_nonce: return "stale-nonce";
    case Reject::future_nonce: return "future-nonce";
    case Reject::insufficient_funds: return "insufficient-funds";
    case Reject::over_resource: return "over-resource";
    case Reject::bad_origin: return "bad-origin";
    case Reject::inherent_outside_block: return "inherent-outside-block";
    case Reject::malformed: return "malformed";
    }
    return "?";
}

Bytes Extrinsic::signing_payload() const
{
    return ByteWriter().str("tx").u8(static_cast<uint8_t>(call)).u32(signer).u64(nonce).blob(args).bytes();
}

Bytes Extrinsic::encode() const
{
    return ByteWriter()
        .u8(static_cast<uint8_t>(call))
        .u32(signer)
        .u64(nonce)
        .blob(args)
        .raw(signature.bytes.view())
        .bytes();
}

Extrinsic Extrinsic::decode(ByteView data)
{
    ByteReader r(data);
    Extrinsic e;
    auto c = r.u8();
    if (c > static_cast<uint8_t>(Call::candidates))
        throw Error(ErrorKind::decode, "unknown call");
    e.call = static_cast<Call>(c);
    e.signer = r.u32();
    e.nonce = r.u64();
    e.args = r.blob();
    e.signature.bytes = Digest::from_view(r.raw(32));
    if (!r.done())
        throw Error(ErrorKind::decode, "trailing bytes in extrinsic");
    return e;
}

Extrinsic make_transfer(AccountId to, uint64_t amount)
{
    return {Call::transfer, 0, 0, ByteWriter().u32(to).u64(amount).bytes(), {}};
}
Extrinsic make_bond(uint64_t amount) { return {Call::bond, 0, 0, ByteWriter().u64(amount).bytes(), {}}; }
Extrinsic make_set_code(uint32_t variant) { return {Call::set_code, 0, 0, ByteWriter().u32(variant).bytes(), {}}; }
Extrinsic make_remark(std::string_view text) { return {Call::remark, 0, 0, to_bytes(text), {}}; }
Extrinsic make_timestamp(uint64_t time) { return {Call::timestamp, 0, 0, ByteWriter().u64(time).bytes(), {}}; }

Extrinsic make_candidates(const std::vector<para::CandidateReceipt>& receipts)
{
    ByteWriter w;
    w.u32(static_cast<uint32_t>(receipts.size()));
    for (const auto& r : receipts)
        w.blob(r.encode());
    return {Call::candidates, 0, 0, std::move(w).bytes(), {}};
}

Extrinsic signed_by(Extrinsic e, AccountId signer, uint64_t nonce, const crypto::SecretKey& secret)
{
    e.signer = signer;
    e.nonce = nonce;
    e.signature = crypto::sign(secret, e.signing_payload());
    return e;
}

std::vector<para::CandidateReceipt> candidates_of(const Extrinsic& e)
{
    ByteReader r(e.args);
    std::vector<para::CandidateReceipt> out;
    auto n = r.u32();
    for (uint32_t i = 0; i < n; ++i)
        out.push_back(para::CandidateReceipt::decode(r.blob()));
    if (!r.done())
        throw Error(ErrorKind::decode, "trailing bytes in candidate set");
    return out;
}

uint64_t timestamp_of(const Extrinsic& e) { return decode_u64(e.args); }

Genesis Genesis::from_json(const std::string& text, crypto::KeyRegistry& registry)
{
    Genesis g;
    try {
        auto doc = nlohmann::json::parse(text);
        g.governance = doc.value("governance", 0u);
        for (const auto& a : doc.at("accounts")) {
            auto id = a.at("id").get<AccountId>();
            auto kp = registry.generate(a.at("seed").get<std::string>());
            g.keys[id] = kp.public_key;
            g.balances[id] = a.value("balance", uint64_t{0});
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::config, std::string("genesis: ") + e.what());
    }
    return g;
}

Digest Body::extrinsics_root() const
{
    std::vector<Digest> leaves;
    for (const auto& e : extrinsics)
        leaves.push_back(e.hash());
    return merkle::root(leaves);
}

Runtime::Runtime(Genesis genesis, const crypto::KeyRegistry& registry)
    : genesis_(std::move(genesis)), registry_(&registry)
{
    if (genesis_.code_variants.empty())
        throw Error(ErrorKind::config, "no code variants");
}

trie::StateTrie Runtime::genesis_state() const
{
    trie::StateTrie s;
    for (const auto& [a, v] : genesis_.balances)
        s = put_u64(s, key("bal/", a), v);
    s = trie::put(s, "code", ByteWriter().u32(0).bytes());
    s = put_u64(s, "mult", genesis_.fees.multiplier);
    s = put_u64(s, "time", 0);
    return put_u64(s, "treasury", 0);
}

econ::Resources Runtime::estimate(const Extrinsic& e) const
{
    uint64_t len = e.encode().size();
    return {len, base_time(e.call) + 10 * len, 4 * len};
}

uint64_t Runtime::fee_of(const trie::StateTrie& state, const Extrinsic& e) const
{
    auto s = genesis_.fees;
    s.type_base = genesis_.code_variants.at(code_variant(state) % genesis_.code_variants.size());
    s.multiplier = multiplier(state);
    return econ::fee(static_cast<uint32_t>(e.call), estimate(e), s);
}

std::optional<Reject> Runtime::validate_extrinsic(const trie::StateTrie& state, const Extrinsic& e) const
{
    if (is_inherent(e.call))
        return Reject::inherent_outside_block;
    auto pub = genesis_.keys.find(e.signer);
    if (pub == genesis_.keys.end() || !registry_->verify(pub->second, e.signing_payload(), e.signature))
        return Reject::bad_signature;
    auto current = nonce(state, e.signer);
    if (e.nonce < current)
        return Reject::stale_nonce;
    if (e.nonce > current)
        return Reject::future_nonce;
    auto limit = priority_of(e.call) == econ::Priority::operational ? genesis_.limits.max
                                                                      : genesis_.limits.regular_max();
    if (!estimate(e).fits(limit))
        return Reject::over_resource;
    if (e.call == Call::set_code && e.signer != genesis_.governance)
        return Reject::bad_origin;
    uint64_t spend = 0;
    try {
        spend = spend_of(e);
        if (e.call == Call::set_code && decode_u32(e.args) >= genesis_.code_variants.size())
            return Reject::malformed;
    } catch (const Error&) {
        return Reject::malformed;
    }
    unsigned __int128 need = static_cast<unsigned __int128>(spend) + fee_of(state, e);
    if (balance(state, e.signer) < need)
        return Reject::insufficient_funds;
    return std::nullopt;
}

trie::StateTrie Runtime::apply_transaction(const trie::StateTrie& state, const Extrinsic& e, uint64_t& fee_total) const
{
    if (auto why = validate_extrinsic(state, e))
        throw Error(ErrorKind::rejected, std::string("extrinsic rejected: ") + to_string(*why));
    auto fee = fee_of(state, e);
    auto s = put_u64(state, key("bal/", e.signer), balance(state, e.signer) - fee);
    s = put_u64(s, key("nonce/", e.signer), e.nonce + 1);
    fee_total += fee;
    switch (e.call) {
    case Call::transfer: {
        auto [to, amount] = decode_transfer(e.args);
        s = put_u64(s, key("bal/", e.signer), balance(s, e.signer) - amount);
        s = put_u64(s, key("bal/", to), balance(s, to) + amount);
        break;
    }
    case Call::bond: {
        auto amount = decode_u64(e.args);
        s = put_u64(s, key("bal/", e.signer), balance(s, e.signer) - amount);
        s = put_u64(s, key("bond/", e.signer), bonded(s, e.signer) + amount);
        break;
    }
    case Call::set_code:
        s = trie::put(s, "code", e.args);
        break;
    default: {
        auto k = std::string("rec/") + to_string(e.call) + "/" + std::to_string(e.signer) + "/" + std::to_string(e.nonce);
        s = trie::put(s, k, e.args);
        break;
    }
    }
    return s;
}

trie::StateTrie Runtime::execute(const trie::StateTrie& state, const Body& body) const
{
    auto s = state;
    bool in_inherents = true;
    int timestamps = 0, candidate_sets = 0;
    uint64_t fee_total = 0;
    econ::Resources regular, total;
    try {
        for (const auto& e : body.extrinsics) {
            if (is_inherent(e.call)) {
                if (!in_inherents)
                    throw Error(ErrorKind::invalid_block, "inherent after transactions");
                if (e.call == Call::timestamp) {
                    if (++timestamps > 1)
                        throw Error(ErrorKind::invalid_block, "second timestamp");
                    s = put_u64(s, "time", timestamp_of(e));
                } else {
                    if (++candidate_sets > 1)
                        throw Error(ErrorKind::invalid_block, "second candidate set");
                    for (const auto& r : candidates_of(e))
                        s = trie::put(s, key("para/", r.para), r.head_data);
                }
                continue;
            }
            in_inherents = false;
            auto r = estimate(e);
            total += r;
            if (priority_of(e.call) == econ::Priority::regular)
                regular += r;
            s = apply_transaction(s, e, fee_total);
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::invalid_block)
            throw;
        throw Error(ErrorKind::invalid_block, std::string("block rejected: ") + e.what());
    }
    if (timestamps != 1)
        throw Error(ErrorKind::invalid_block, "missing timestamp inherent");
    if (!regular.fits(genesis_.limits.regular_max()) || !total.fits(genesis_.limits.max))
        throw Error(ErrorKind::invalid_block, "block over resource limits");

    auto producer = genesis_.fees.producer_share.apply(fee_total);
    s = put_u64(s, key("bal/", body.author), balance(s, body.author) + producer);
    s = put_u64(s, "treasury", treasury(s) + (fee_total - producer));

    auto fees = genesis_.fees;
    fees.multiplier = multiplier(s);
    auto cap = genesis_.limits.regular_max().time;
    fees = econ::update_multiplier(fees, Ratio{std::min(regular.time, cap), cap});
    return put_u64(s, "mult", fees.multiplier);
}

trie::StateTrie Runtime::apply_block(const trie::StateTrie& state, const Body& body, const Digest& expected_root) const
{
    auto s = execute(state, body);
    if (s.root() != expected_root)
        throw Error(ErrorKind::invalid_block, "state root mismatch");
    return s;
}

uint64_t Runtime::balance(const trie::StateTrie& s, AccountId a) { return get_u64(s, key("bal/", a)); }
uint64_t Runtime::nonce(const trie::StateTrie& s, AccountId a) { return get_u64(s, key("nonce/", a)); }
uint64_t Runtime::bonded(const trie::StateTrie& s, AccountId a) { return get_u64(s, key("bond/", a)); }
uint64_t Runtime::time(const trie::StateTrie& s) { return get_u64(s, "time"); }
uint64_t Runtime::treasury(const trie::StateTrie& s) { return get_u64(s, "treasury"); }

uint64_t Runtime::multiplier(const trie::StateTrie& s)
{
    auto v = get_u64(s, "mult");
    return v == 0 ? econ::FeeSchedule::unit : v;
}

uint32_t Runtime::code_variant(const trie::StateTrie& s)
{
    auto v = trie::get(s, "code");
    if (!v)
        return 0;
    ByteReader r(*v);
    return r.u32();
}

std::optional<Bytes> Runtime::para_head(const trie::StateTrie& s, xcmp::ParaId id) { return trie::get(s, key("para/", id)); }

uint64_t Runtime::total_issuance(const trie::StateTrie& s)
{
    uint64_t sum = 0;
    s.for_each([&](const Bytes& k, const Bytes& v) {
        std::string_view name(reinterpret_cast<const char*>(k.data()), k.size());
        if (name.starts_with("bal/") || name.starts_with("bond/") || name == "treasury")
            sum += ByteReader(v).u64();
    });
    return sum;
}

bool inherent_check(const Body& body, uint64_t local_slot_start, uint64_t tolerance,
                    const std::function<bool(const para::CandidateReceipt&)>& candidate_ok)
{
    if (body.extrinsics.empty() || body.extrinsics[0].call != Call::timestamp)
        return false;
    try {
        auto ts = timestamp_of(body.extrinsics[0]);
        auto gap = ts > local_slot_start ? ts - local_slot_start : local_slot_start - ts;
        if (gap > tolerance)
            return false;
        for (size_t i = 1; i < body.extrinsics.size(); ++i) {
            const auto& e = body.extrinsics[i];
            if (e.call == Call::timestamp)
                return false;
            if (e.call == Call::candidates)
                for (const auto& r : candidates_of(e))
                    if (!candidate_ok(r))
                        return false;
        }
    } catch (const Error&) {
        return false;
    }
    return true;
}

std::optional<Reject> TransactionQueue::submit(const Runtime& rt, const trie::StateTrie& state, Extrinsic e)
{
    auto why = rt.validate_extrinsic(state, e);
    if (why && *why != Reject::future_nonce && *why != Reject::insufficient_funds)
        return why;
    arrival_[e.hash()] = arrivals_++;
    pending_[e.signer][e.nonce] = std::move(e);
    return std::nullopt;
}

std::vector<Extrinsic> TransactionQueue::select(const Runtime& rt, const trie::StateTrie& state) const
{
    const auto& limits = rt.genesis().limits;
    std::vector<Extrinsic> out;
    auto s = state;
    uint64_t fees = 0;
    econ::Resources regular, total;
    std::set<AccountId> stuck;
    for (;;) {
        // next ready transaction of every signer, best first
        const Extrinsic* best = nullptr;
        for (const auto& [signer, by_nonce] : pending_) {
            if (stuck.contains(signer))
                continue;
            auto it = by_nonce.find(Runtime::nonce(s, signer));
            if (it == by_nonce.end())
                continue;
            const auto& cand = it->second;
            if (!best) {
                best = &cand;
                continue;
            }
            auto pc = priority_of(cand.call), pb = priority_of(best->call);
            if (pc != pb ? pc == econ::Priority::operational : arrival_.at(cand.hash()) < arrival_.at(best->hash()))
                best = &cand;
        }
        if (!best)
            break;
        auto r = rt.estimate(*best);
        auto next_total = total;
        next_total += r;
        auto next_regular = regular;
        bool op = priority_of(best->call) == econ::Priority::operational;
        if (!op)
            next_regular += r;
        if (!next_total.fits(limits.max) || !next_regular.fits(limits.regular_max())) {
            stuck.insert(best->signer);
            continue;
        }
        try {
            s = rt.apply_transaction(s, *best, fees);
        } catch (const Error&) {
            stuck.insert(best->signer);
            continue;
        }
        total = next_total;
        regular = next_regular;
        out.push_back(*best);
    }
    return out;
}

void TransactionQueue::prune(const trie::StateTrie& state)
{
    for (auto it = pending_.begin(); it != pending_.end();) {
        auto current = Runtime::nonce(state, it->first);
        auto& by_nonce = it->second;
        for (auto n = by_nonce.begin(); n != by_nonce.end() && n->first < current;) {
            arrival_.erase(n->second.hash());
            n = by_nonce.erase(n);
        }
        it = by_nonce.empty() ? pending_.erase(it) : std::next(it);
    }
}

size_t TransactionQueue::size() const
{
    size_t n = 0;
    for (const auto& [_, m] : pending_)
        n += m.size();
    return n;
}

} // namespace relaylab::runtime
