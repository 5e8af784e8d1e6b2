// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace relaylab {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

enum class ErrorKind {
    key_absent,
    instance_infeasible,
    cap_exceeded,
    insufficient_pieces,
    fork_mismatch,
    unknown_validator,
    unknown_candidate,
    undefined_support,
    no_data,
    orphan,
    invalid_block,
    rejected,
    config,
    decode,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind)
    {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);

inline Bytes to_bytes(std::string_view s)
{
    return Bytes(s.begin(), s.end());
}

inline ByteView as_view(std::string_view s)
{
    return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

// Little-endian, length-prefixed byte writer used by every canonical encoding.
class ByteWriter {
public:
    ByteWriter& u8(uint8_t v)
    {
        out_.push_back(v);
        return *this;
    }
    ByteWriter& u16(uint16_t v) { return uint_le(v, 2); }
    ByteWriter& u32(uint32_t v) { return uint_le(v, 4); }
    ByteWriter& u64(uint64_t v) { return uint_le(v, 8); }
    ByteWriter& i64(int64_t v) { return uint_le(static_cast<uint64_t>(v), 8); }
    ByteWriter& raw(ByteView data)
    {
        out_.insert(out_.end(), data.begin(), data.end());
        return *this;
    }
    // u32 length prefix followed by the bytes
    ByteWriter& blob(ByteView data)
    {
        u32(static_cast<uint32_t>(data.size()));
        return raw(data);
    }
    ByteWriter& str(std::string_view s) { return blob(as_view(s)); }

    const Bytes& bytes() const& { return out_; }
    Bytes bytes() && { return std::move(out_); }

private:
    ByteWriter& uint_le(uint64_t v, int n)
    {
        for (int i = 0; i < n; ++i)
            out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
        return *this;
    }

    Bytes out_;
};

class ByteReader {
public:
    explicit ByteReader(ByteView data) : data_(data) {}

    uint8_t u8() { return static_cast<uint8_t>(uint_le(1)); }
    uint16_t u16() { return static_cast<uint16_t>(uint_le(2)); }
    uint32_t u32() { return static_cast<uint32_t>(uint_le(4)); }
    uint64_t u64() { return uint_le(8); }
    ByteView raw(size_t n)
    {
        need(n);
        auto res = data_.subspan(pos_, n);
        pos_ += n;
        return res;
    }
    Bytes blob()
    {
        auto n = u32();
        auto v = raw(n);
        return Bytes(v.begin(), v.end());
    }
    bool done() const noexcept { return pos_ == data_.size(); }
    size_t remaining() const noexcept { return data_.size() - pos_; }

private:
    void need(size_t n) const
    {
        if (data_.size() - pos_ < n)
            throw Error(ErrorKind::decode, "unexpected end of input");
    }
    uint64_t uint_le(int n)
    {
        need(static_cast<size_t>(n));
        uint64_t v = 0;
        for (int i = 0; i < n; ++i)
            v |= static_cast<uint64_t>(data_[pos_ + i]) << (8 * i);
        pos_ += static_cast<size_t>(n);
        return v;
    }

    ByteView data_;
    size_t pos_ = 0;
};

// Exact rational in [0, 1] style parameters (thresholds, fractions).
struct Ratio {
    uint64_t num = 0;
    uint64_t den = 1;

    static Ratio from_double(double v, uint64_t den = 1'000'000);
    double to_double() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
    // floor(value * ratio) without overflow for value < 2^64
    uint64_t apply(uint64_t value) const;
};

} // namespace relaylab
