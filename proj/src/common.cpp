// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <relaylab/common.hpp>

#include <cmath>

namespace relaylab {

const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::key_absent: return "key-absent";
    case ErrorKind::instance_infeasible: return "instance-infeasible";
    case ErrorKind::cap_exceeded: return "cap-exceeded";
    case ErrorKind::insufficient_pieces: return "insufficient-pieces";
    case ErrorKind::fork_mismatch: return "fork-mismatch";
    case ErrorKind::unknown_validator: return "unknown-validator";
    case ErrorKind::unknown_candidate: return "unknown-candidate";
    case ErrorKind::undefined_support: return "undefined-support";
    case ErrorKind::no_data: return "no-data";
    case ErrorKind::orphan: return "orphan";
    case ErrorKind::invalid_block: return "invalid-block";
    case ErrorKind::rejected: return "rejected";
    case ErrorKind::config: return "config";
    case ErrorKind::decode: return "decode";
    }
    return "unknown";
}

std::string to_hex(ByteView data)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string res;
    res.reserve(data.size() * 2);
    for (auto b : data) {
        res.push_back(digits[b >> 4]);
        res.push_back(digits[b & 0xf]);
    }
    return res;
}

namespace {
int hex_value(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}
} // namespace

Bytes from_hex(std::string_view hex)
{
    if (hex.starts_with("0x"))
        hex.remove_prefix(2);
    if (hex.size() % 2 != 0)
        throw Error(ErrorKind::decode, "odd-length hex string");
    Bytes res;
    res.reserve(hex.size() / 2);
    for (size_t i = 0; i < hex.size(); i += 2) {
        auto hi = hex_value(hex[i]);
        auto lo = hex_value(hex[i + 1]);
        if (hi < 0 || lo < 0)
            throw Error(ErrorKind::decode, "invalid hex digit");
        res.push_back(static_cast<uint8_t>(hi << 4 | lo));
    }
    return res;
}

Ratio Ratio::from_double(double v, uint64_t den)
{
    if (!(v >= 0.0))
        throw Error(ErrorKind::config, "negative ratio");
    return Ratio{static_cast<uint64_t>(std::llround(v * static_cast<double>(den))), den};
}

uint64_t Ratio::apply(uint64_t value) const
{
    return static_cast<uint64_t>(static_cast<unsigned __int128>(value) * num / den);
}

} // namespace relaylab
