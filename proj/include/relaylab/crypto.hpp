// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <relaylab/common.hpp>

#include <array>
#include <compare>
#include <cstring>
#include <functional>
#include <initializer_list>
#include <string>
#include <unordered_map>

namespace relaylab {

// 32-byte output of the reference hash (BLAKE2b-256).
struct Digest {
    std::array<uint8_t, 32> bytes{};

    static Digest from_view(ByteView v);
    static Digest from_hex(std::string_view hex);

    std::string hex() const { return to_hex(bytes); }
    ByteView view() const noexcept { return bytes; }
    bool is_zero() const noexcept;

    auto operator<=>(const Digest&) const = default;
};

struct DigestHasher {
    size_t operator()(const Digest& d) const noexcept
    {
        size_t v;
        std::memcpy(&v, d.bytes.data(), sizeof(v));
        return v;
    }
};

Digest hash(ByteView data);
Digest hash(std::initializer_list<ByteView> parts);
Digest keyed_hash(ByteView key, ByteView data);

namespace crypto {

struct SecretKey {
    Digest bytes;
};

struct PublicKey {
    Digest bytes;
    auto operator<=>(const PublicKey&) const = default;
};

struct KeyPair {
    SecretKey secret;
    PublicKey public_key;
};

struct Signature {
    Digest bytes;
    auto operator<=>(const Signature&) const = default;
};

// value interpreted big-endian as an integer in [0, 2^256)
struct VrfOutput {
    Digest value;
    Digest proof;
    auto operator<=>(const VrfOutput&) const = default;
};

PublicKey derive_public(const SecretKey& secret);
VrfOutput vrf_eval(const SecretKey& secret, ByteView input);
Signature sign(const SecretKey& secret, ByteView message);

// value * den < num * 2^256, exactly
bool vrf_below(const VrfOutput& out, uint64_t num, uint64_t den);

// Maps public keys back to their secrets so verification can recompute the keyed
// hashes. Only this class sees secrets of other parties; it is frozen once a
// scenario starts and then only used through the const verification methods.
class KeyRegistry {
public:
    KeyPair generate(ByteView seed);
    KeyPair generate(std::string_view seed) { return generate(as_view(seed)); }

    bool vrf_verify(const PublicKey& pub, ByteView input, const VrfOutput& out) const;
    bool verify(const PublicKey& pub, ByteView message, const Signature& sig) const;
    bool knows(const PublicKey& pub) const { return secrets_.contains(pub.bytes); }
    size_t size() const noexcept { return secrets_.size(); }

private:
    std::unordered_map<Digest, SecretKey, DigestHasher> secrets_;
};

} // namespace crypto
} // namespace relaylab

template <>
struct std::hash<relaylab::Digest> {
    size_t operator()(const relaylab::Digest& d) const noexcept { return relaylab::DigestHasher{}(d); }
};
