// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <relaylab/parachain.hpp>

#include <charconv>

namespace relaylab::para {

namespace {

void write_outgoing(ByteWriter& w, const xcmp::Outgoing& out)
{
    w.u32(static_cast<uint32_t>(out.size()));
    for (const auto& [d, msgs] : out) {
        w.u32(d).u32(static_cast<uint32_t>(msgs.size()));
        for (const auto& m : msgs)
            w.blob(m);
    }
}

xcmp::Outgoing read_outgoing(ByteReader& r)
{
    xcmp::Outgoing out;
    auto n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
        auto d = r.u32();
        auto count = r.u32();
        auto& msgs = out[d];
        for (uint32_t j = 0; j < count; ++j)
            msgs.push_back(r.blob());
    }
    return out;
}

Digest read_digest(ByteReader& r) { return Digest::from_view(r.raw(32)); }

std::optional<uint64_t> parse_u64(std::string_view s)
{
    uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || p != s.data() + s.size())
        return std::nullopt;
    return v;
}

// returns an empty string on success, otherwise the reason
std::string apply_payload(StvfKind kind, Bytes& app_state, std::string_view payload)
{
    switch (kind) {
    case StvfKind::adversarial:
        return "adversarial chain";
    case StvfKind::counter: {
        if (payload.size() < 2 || payload[0] != '+')
            return "malformed counter payload";
        auto n = parse_u64(payload.substr(1));
        if (!n)
            return "malformed counter payload";
        auto v = counter_value(app_state);
        if (v + *n < v)
            return "counter overflow";
        app_state = counter_state(v + *n);
        return {};
    }
    case StvfKind::ledger: {
        auto balances = ledger_balances(app_state);
        while (!payload.empty()) {
            auto end = payload.find(';');
            auto item = payload.substr(0, end);
            payload = end == std::string_view::npos ? std::string_view{} : payload.substr(end + 1);
            auto gt = item.find('>');
            auto colon = item.find(':');
            if (gt == std::string_view::npos || colon == std::string_view::npos || colon < gt || gt == 0)
                return "malformed transfer";
            std::string from(item.substr(0, gt)), to(item.substr(gt + 1, colon - gt - 1));
            auto amount = parse_u64(item.substr(colon + 1));
            if (to.empty() || !amount)
                return "malformed transfer";
            auto it = balances.find(from);
            if (it == balances.end() || it->second < *amount)
                return "overdraft by " + from;
            it->second -= *amount;
            balances[to] += *amount;
        }
        app_state = ledger_state(balances);
        return {};
    }
    }
    return "unknown chain";
}

} // namespace

Bytes HeadData::encode() const
{
    ByteWriter w;
    w.u64(number).blob(app_state).raw(message_root.view());
    w.u32(static_cast<uint32_t>(out_heads.size()));
    for (const auto& [d, h] : out_heads)
        w.u32(d).raw(h.view());
    w.u64(watermark.relay_number).u32(watermark.sender).raw(inbox_digest.view());
    return std::move(w).bytes();
}

HeadData HeadData::decode(ByteView data)
{
    ByteReader r(data);
    HeadData h;
    h.number = r.u64();
    h.app_state = r.blob();
    h.message_root = read_digest(r);
    auto n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
        auto d = r.u32();
        h.out_heads[d] = read_digest(r);
    }
    h.watermark.relay_number = r.u64();
    h.watermark.sender = r.u32();
    h.inbox_digest = read_digest(r);
    if (!r.done())
        throw Error(ErrorKind::decode, "trailing bytes in head data");
    return h;
}

Bytes PovBlock::encode() const
{
    ByteWriter w;
    w.u32(para).blob(parent_head).blob(payload);
    write_outgoing(w, outgoing);
    w.blob(witness);
    return std::move(w).bytes();
}

PovBlock PovBlock::decode(ByteView data)
{
    ByteReader r(data);
    PovBlock p;
    p.para = r.u32();
    p.parent_head = r.blob();
    p.payload = r.blob();
    p.outgoing = read_outgoing(r);
    p.witness = r.blob();
    if (!r.done())
        throw Error(ErrorKind::decode, "trailing bytes in pov block");
    return p;
}

const char* to_string(StvfKind k)
{
    switch (k) {
    case StvfKind::counter: return "counter";
    case StvfKind::ledger: return "ledger";
    case StvfKind::adversarial: return "adversarial";
    }
    return "?";
}

StvfKind parse_stvf(std::string_view s)
{
    if (s == "counter")
        return StvfKind::counter;
    if (s == "ledger")
        return StvfKind::ledger;
    if (s == "adversarial")
        return StvfKind::adversarial;
    throw Error(ErrorKind::config, "unknown parachain kind: " + std::string(s));
}

Bytes counter_state(uint64_t value) { return ByteWriter().u64(value).bytes(); }

uint64_t counter_value(ByteView app_state)
{
    ByteReader r(app_state);
    auto v = r.u64();
    if (!r.done())
        throw Error(ErrorKind::decode, "bad counter state");
    return v;
}

Bytes ledger_state(const std::map<std::string, uint64_t>& balances)
{
    ByteWriter w;
    w.u32(static_cast<uint32_t>(balances.size()));
    for (const auto& [name, v] : balances)
        w.str(name).u64(v);
    return std::move(w).bytes();
}

std::map<std::string, uint64_t> ledger_balances(ByteView app_state)
{
    ByteReader r(app_state);
    std::map<std::string, uint64_t> out;
    auto n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
        auto name = r.blob();
        out[std::string(name.begin(), name.end())] = r.u64();
    }
    if (!r.done())
        throw Error(ErrorKind::decode, "bad ledger state");
    return out;
}

HeadData genesis_head(StvfKind kind, const std::map<std::string, uint64_t>& balances)
{
    HeadData h;
    if (kind == StvfKind::counter)
        h.app_state = counter_state(0);
    else if (kind == StvfKind::ledger)
        h.app_state = ledger_state(balances);
    return h;
}

StvfResult stvf_validate(StvfKind kind, const PovBlock& pov, ByteView parent_head, const RelayInputs& inputs)
{
    StvfResult res;
    try {
        if (pov.payload.empty()) {
            res.reason = "empty payload";
            return res;
        }
        if (!std::equal(pov.parent_head.begin(), pov.parent_head.end(), parent_head.begin(), parent_head.end())) {
            res.reason = "parent head mismatch";
            return res;
        }
        auto head = HeadData::decode(parent_head);
        std::string_view payload(reinterpret_cast<const char*>(pov.payload.data()), pov.payload.size());
        if (auto why = apply_payload(kind, head.app_state, payload); !why.empty()) {
            res.reason = why;
            return res;
        }
        if (!xcmp::respects_blocklist(pov.para, pov.outgoing, inputs.blocklist)) {
            res.reason = "message to a destination that blocks this sender";
            return res;
        }
        for (const auto& [d, msgs] : pov.outgoing)
            if (d == pov.para && !msgs.empty()) {
                res.reason = "message to self";
                return res;
            }
        if (inputs.fork) {
            auto inbox = xcmp::next_inbox(pov.para, head.watermark, *inputs.fork, inputs.max_para, inputs.max_batches);
            for (const auto& b : inbox.batches)
                for (const auto& m : b.messages)
                    head.inbox_digest = xcmp::chain_step(head.inbox_digest, m);
            head.watermark = inbox.watermark;
            res.received = std::move(inbox.batches);
        }
        auto c = xcmp::build_commitment(head.out_heads, pov.outgoing);
        head.number += 1;
        head.message_root = c.message_root;
        head.out_heads = c.heads;
        res.head = head.encode();
        res.outgoing = pov.outgoing;
        res.valid = true;
    } catch (const Error& e) {
        res = StvfResult{};
        res.reason = std::string("malformed: ") + e.what();
    }
    return res;
}

Bytes CandidateReceipt::encode() const
{
    ByteWriter w;
    w.u32(para).raw(relay_parent.view()).blob(head_data).raw(pov_hash.view()).raw(erasure_root.view()).u32(pieces);
    w.u32(static_cast<uint32_t>(attestations.size()));
    for (const auto& a : attestations)
        w.u32(a.validator).raw(a.signature.bytes.view());
    return std::move(w).bytes();
}

Digest CandidateReceipt::hash() const
{
    ByteWriter w;
    w.u32(para).raw(relay_parent.view()).blob(head_data).raw(pov_hash.view()).raw(erasure_root.view()).u32(pieces);
    return relaylab::hash(w.bytes());
}

CandidateReceipt CandidateReceipt::decode(ByteView data)
{
    ByteReader r(data);
    CandidateReceipt c;
    c.para = r.u32();
    c.relay_parent = read_digest(r);
    c.head_data = r.blob();
    c.pov_hash = read_digest(r);
    c.erasure_root = read_digest(r);
    c.pieces = r.u32();
    auto n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
        Attestation a;
        a.validator = r.u32();
        a.signature.bytes = read_digest(r);
        c.attestations.push_back(a);
    }
    if (!r.done())
        throw Error(ErrorKind::decode, "trailing bytes in receipt");
    return c;
}

Bytes attestation_message(const CandidateReceipt& r)
{
    auto h = r.hash();
    return ByteWriter().str("attest").raw(h.view()).bytes();
}

PipelineResult candidate_pipeline(StvfKind kind, const PovBlock& pov, const Digest& relay_parent,
                                  const RelayInputs& inputs, std::span<const AssignedValidator> assigned,
                                  size_t total_validators)
{
    PipelineResult out;
    out.verdict = stvf_validate(kind, pov, pov.parent_head, inputs);
    Bytes head = out.verdict.head;
    if (!out.verdict.valid) {
        // what a colluding group would put forward: the parent with the number bumped
        try {
            auto h = HeadData::decode(pov.parent_head);
            h.number += 1;
            h.app_state = pov.payload;
            head = h.encode();
        } catch (const Error&) {
            head = pov.payload;
        }
    }
    auto blob = pov.encode();
    out.pieces = erasure::encode(blob, total_validators);

    CandidateReceipt r;
    r.para = pov.para;
    r.relay_parent = relay_parent;
    r.head_data = head;
    r.pov_hash = pov.hash();
    r.erasure_root = out.pieces.root;
    r.pieces = static_cast<uint32_t>(total_validators);
    auto msg = attestation_message(r);
    for (const auto& v : assigned) {
        if (v.honest && !out.verdict.valid) {
            out.rejected_by.push_back(v.index);
            continue;
        }
        r.attestations.push_back({v.index, crypto::sign(v.keys->secret, msg)});
    }
    if (r.attestations.size() >= attestation_threshold(assigned.size()))
        out.receipt = std::move(r);
    return out;
}

bool attestations_valid(const CandidateReceipt& r, const std::map<uint32_t, crypto::PublicKey>& group,
                        const crypto::KeyRegistry& registry)
{
    auto msg = attestation_message(r);
    std::set<uint32_t> seen;
    for (const auto& a : r.attestations) {
        auto it = group.find(a.validator);
        if (it == group.end() || !seen.insert(a.validator).second)
            return false;
        if (!registry.verify(it->second, msg, a.signature))
            return false;
    }
    return seen.size() >= attestation_threshold(group.size());
}

size_t secondary_checker_count(size_t invalidity_reports, size_t unavailability_reports, size_t base, size_t n)
{
    return std::min(n, base + 2 * invalidity_reports + unavailability_reports);
}

Bytes checker_lottery_input(const Digest& epoch_randomness, const Digest& candidate)
{
    return ByteWriter().str("approval").raw(epoch_randomness.view()).raw(candidate.view()).bytes();
}

bool checker_selected(const crypto::VrfOutput& out, size_t count, size_t n)
{
    if (n == 0)
        return false;
    if (count >= n)
        return true;
    return crypto::vrf_below(out, count, n);
}

std::vector<uint32_t> assign_secondary_checkers(const Digest& candidate, const Digest& epoch_randomness, size_t count,
                                                std::span<const crypto::KeyPair> validators)
{
    auto input = checker_lottery_input(epoch_randomness, candidate);
    std::vector<uint32_t> out;
    for (size_t i = 0; i < validators.size(); ++i)
        if (checker_selected(crypto::vrf_eval(validators[i].secret, input), count, validators.size()))
            out.push_back(static_cast<uint32_t>(i));
    return out;
}

ReportEffects process_report(const ValidityReport& report, const std::map<Digest, CandidateRecord>& candidates)
{
    auto it = candidates.find(report.candidate);
    if (it == candidates.end())
        throw Error(ErrorKind::unknown_candidate, "report for unknown candidate " + report.candidate.hex());
    const auto& rec = it->second;
    ReportEffects fx;
    switch (report.kind) {
    case ReportKind::fisherman_invalid:
        if (report.bond == 0)
            throw Error(ErrorKind::rejected, "fisherman report without bond");
        [[fallthrough]];
    case ReportKind::checker_verdict:
        if (!report.claims_invalid)
            break;
        if (rec.invalid) {
            fx.slash_validators = rec.attesters;
            fx.reward_reporter = report.reporter;
            fx.withhold_finality = true;
        } else if (report.bond > 0) {
            fx.slash_reporter_bond = true;
        }
        break;
    case ReportKind::unavailability:
        if (!rec.reconstructible) {
            fx.escalate = true;
            fx.withhold_finality = true;
        }
        break;
    }
    return fx;
}

} // namespace relaylab::para
