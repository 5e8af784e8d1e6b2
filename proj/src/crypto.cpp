// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <relaylab/crypto.hpp>

#include <algorithm>
#include <sodium.h>

#include <boost/multiprecision/cpp_int.hpp>

namespace relaylab {

namespace {
struct SodiumInit {
    SodiumInit()
    {
        if (sodium_init() < 0)
            throw std::runtime_error("libsodium initialisation failed");
    }
};

void ensure_sodium()
{
    static SodiumInit init;
}
} // namespace

Digest Digest::from_view(ByteView v)
{
    if (v.size() != 32)
        throw Error(ErrorKind::decode, "digest must be 32 bytes, got " + std::to_string(v.size()));
    Digest d;
    std::copy(v.begin(), v.end(), d.bytes.begin());
    return d;
}

Digest Digest::from_hex(std::string_view hex)
{
    auto b = relaylab::from_hex(hex);
    return from_view(b);
}

bool Digest::is_zero() const noexcept
{
    return std::all_of(bytes.begin(), bytes.end(), [](uint8_t b) { return b == 0; });
}

Digest hash(ByteView data)
{
    ensure_sodium();
    Digest d;
    crypto_generichash(d.bytes.data(), d.bytes.size(), data.data(), data.size(), nullptr, 0);
    return d;
}

Digest hash(std::initializer_list<ByteView> parts)
{
    ensure_sodium();
    crypto_generichash_state st;
    crypto_generichash_init(&st, nullptr, 0, 32);
    for (auto p : parts)
        crypto_generichash_update(&st, p.data(), p.size());
    Digest d;
    crypto_generichash_final(&st, d.bytes.data(), d.bytes.size());
    return d;
}

Digest keyed_hash(ByteView key, ByteView data)
{
    ensure_sodium();
    Digest d;
    crypto_generichash(d.bytes.data(), d.bytes.size(), data.data(), data.size(), key.data(), key.size());
    return d;
}

namespace crypto {

namespace {
constexpr std::string_view public_tag = "public";
constexpr std::string_view proof_tag = "proof";
} // namespace

PublicKey derive_public(const SecretKey& secret)
{
    return {hash({as_view(public_tag), secret.bytes.view()})};
}

VrfOutput vrf_eval(const SecretKey& secret, ByteView input)
{
    return {
        hash({secret.bytes.view(), input}),
        hash({as_view(proof_tag), secret.bytes.view(), input}),
    };
}

Signature sign(const SecretKey& secret, ByteView message)
{
    return {keyed_hash(secret.bytes.view(), message)};
}

KeyPair KeyRegistry::generate(ByteView seed)
{
    SecretKey secret{hash({as_view("secret"), seed})};
    KeyPair kp{secret, derive_public(secret)};
    secrets_.emplace(kp.public_key.bytes, secret);
    return kp;
}

bool KeyRegistry::vrf_verify(const PublicKey& pub, ByteView input, const VrfOutput& out) const
{
    auto it = secrets_.find(pub.bytes);
    if (it == secrets_.end())
        return false;
    return vrf_eval(it->second, input) == out;
}

bool KeyRegistry::verify(const PublicKey& pub, ByteView message, const Signature& sig) const
{
    auto it = secrets_.find(pub.bytes);
    if (it == secrets_.end())
        return false;
    return sign(it->second, message) == sig;
}

bool vrf_below(const VrfOutput& out, uint64_t num, uint64_t den)
{
    using boost::multiprecision::cpp_int;
    cpp_int value;
    for (uint8_t b : out.value.bytes)
        value = (value << 8) | b;
    return value * den < (cpp_int(num) << 256);
}

} // namespace crypto
} // namespace relaylab
