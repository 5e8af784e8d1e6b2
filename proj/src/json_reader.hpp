// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <relaylab/common.hpp>

#include <json.hpp>

#include <exception>
#include <set>

namespace relaylab::json_reader {

using nlohmann::json;

[[noreturn]] inline void bad(const std::string& what) { throw Error(ErrorKind::config, what); }

// Object reader that rejects keys nobody asked for.
class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j.is_object())
            bad(path_ + ": expected an object");
    }
    ~Obj() noexcept(false)
    {
        if (std::uncaught_exceptions() == 0)
            for (const auto& [k, v] : j_.items())
                if (!seen_.contains(k))
                    bad(path_ + "." + k + ": unknown key");
    }

    const json* get(const std::string& k)
    {
        seen_.insert(k);
        auto it = j_.find(k);
        return it == j_.end() ? nullptr : &*it;
    }
    std::string at(const std::string& k) const { return path_ + "." + k; }

    template <class T>
    void num(const std::string& k, T& out)
    {
        if (const auto* v = get(k)) {
            if constexpr (std::is_signed_v<T>) {
                if (!v->is_number_integer())
                    bad(at(k) + ": expected an integer");
            } else if (!v->is_number_unsigned()) {
                bad(at(k) + ": expected a non-negative integer");
            }
            out = v->get<T>();
        }
    }
    void flag(const std::string& k, bool& out)
    {
        if (const auto* v = get(k)) {
            if (!v->is_boolean())
                bad(at(k) + ": expected a boolean");
            out = v->get<bool>();
        }
    }
    void text(const std::string& k, std::string& out)
    {
        if (const auto* v = get(k)) {
            if (!v->is_string())
                bad(at(k) + ": expected a string");
            out = v->get<std::string>();
        }
    }
    void ratio(const std::string& k, Ratio& out)
    {
        if (const auto* v = get(k))
            out = parse_ratio(*v, at(k));
    }

    static Ratio parse_ratio(const json& v, const std::string& where)
    {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number_unsigned() || !v[1].is_number_unsigned())
            bad(where + ": expected [numerator, denominator]");
        Ratio r{v[0].get<uint64_t>(), v[1].get<uint64_t>()};
        if (r.den == 0)
            bad(where + ": zero denominator");
        return r;
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

} // namespace relaylab::json_reader
