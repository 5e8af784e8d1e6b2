// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <relaylab/trie.hpp>

#include <algorithm>
#include <array>

namespace relaylab::trie {

using Nibbles = std::vector<uint8_t>;
using NodePtr = std::shared_ptr<const StateTrie::Node>;

struct StateTrie::Node {
    Nibbles partial;
    std::optional<Bytes> value;
    std::array<NodePtr, 16> children{};
    size_t count = 0;
    Digest digest;

    size_t child_count() const
    {
        return static_cast<size_t>(std::count_if(children.begin(), children.end(), [](const auto& c) { return c != nullptr; }));
    }

    Bytes encode() const
    {
        ByteWriter w;
        bool branch = child_count() > 0;
        w.u8(branch ? (value ? 0x03 : 0x02) : 0x01);
        w.u16(static_cast<uint16_t>(partial.size()));
        for (size_t i = 0; i < partial.size(); i += 2) {
            uint8_t hi = partial[i];
            uint8_t lo = i + 1 < partial.size() ? partial[i + 1] : 0;
            w.u8(static_cast<uint8_t>(hi << 4 | lo));
        }
        if (branch) {
            uint16_t bitmap = 0;
            for (size_t i = 0; i < 16; ++i)
                if (children[i])
                    bitmap |= static_cast<uint16_t>(1u << i);
            w.u16(bitmap);
        }
        if (value)
            w.blob(*value);
        for (const auto& c : children)
            if (c)
                w.raw(c->digest.view());
        return std::move(w).bytes();
    }
};

namespace {

Nibbles to_nibbles(ByteView key)
{
    Nibbles n;
    n.reserve(key.size() * 2);
    for (auto b : key) {
        n.push_back(b >> 4);
        n.push_back(b & 0x0f);
    }
    return n;
}

Bytes from_nibbles(const Nibbles& n)
{
    Bytes b(n.size() / 2);
    for (size_t i = 0; i < b.size(); ++i)
        b[i] = static_cast<uint8_t>(n[2 * i] << 4 | n[2 * i + 1]);
    return b;
}

NodePtr make(Nibbles partial, std::optional<Bytes> value, std::array<NodePtr, 16> children)
{
    auto node = std::make_shared<StateTrie::Node>();
    node->partial = std::move(partial);
    node->value = std::move(value);
    node->children = std::move(children);
    node->count = node->value ? 1 : 0;
    for (const auto& c : node->children)
        if (c)
            node->count += c->count;
    node->digest = hash(node->encode());
    return node;
}

NodePtr leaf(std::span<const uint8_t> path, ByteView value)
{
    return make(Nibbles(path.begin(), path.end()), Bytes(value.begin(), value.end()), {});
}

size_t common_prefix(std::span<const uint8_t> a, std::span<const uint8_t> b)
{
    size_t n = std::min(a.size(), b.size());
    size_t i = 0;
    while (i < n && a[i] == b[i])
        ++i;
    return i;
}

// Restore the canonical shape after a removal below this node.
NodePtr normalise(Nibbles partial, std::optional<Bytes> value, std::array<NodePtr, 16> children)
{
    size_t n = 0;
    size_t only = 0;
    for (size_t i = 0; i < 16; ++i)
        if (children[i]) {
            ++n;
            only = i;
        }
    if (!value && n == 0)
        return nullptr;
    if (!value && n == 1) {
        const auto& child = children[only];
        partial.push_back(static_cast<uint8_t>(only));
        partial.insert(partial.end(), child->partial.begin(), child->partial.end());
        return make(std::move(partial), child->value, child->children);
    }
    return make(std::move(partial), std::move(value), std::move(children));
}

NodePtr insert_at(const NodePtr& node, std::span<const uint8_t> path, ByteView value)
{
    if (!node)
        return leaf(path, value);
    auto common = common_prefix(node->partial, path);
    if (common == node->partial.size()) {
        if (common == path.size())
            return make(node->partial, Bytes(value.begin(), value.end()), node->children);
        auto idx = path[common];
        auto children = node->children;
        children[idx] = insert_at(children[idx], path.subspan(common + 1), value);
        return make(node->partial, node->value, std::move(children));
    }
    // split: a new branch takes the shared prefix
    std::array<NodePtr, 16> children{};
    auto old_idx = node->partial[common];
    children[old_idx] = make(Nibbles(node->partial.begin() + static_cast<ptrdiff_t>(common) + 1, node->partial.end()),
                             node->value, node->children);
    std::optional<Bytes> branch_value;
    if (common == path.size())
        branch_value = Bytes(value.begin(), value.end());
    else
        children[path[common]] = leaf(path.subspan(common + 1), value);
    return make(Nibbles(path.begin(), path.begin() + static_cast<ptrdiff_t>(common)), std::move(branch_value),
                std::move(children));
}

NodePtr erase_at(const NodePtr& node, std::span<const uint8_t> path, bool& removed)
{
    if (!node)
        return node;
    auto common = common_prefix(node->partial, path);
    if (common != node->partial.size())
        return node;
    if (common == path.size()) {
        if (!node->value)
            return node;
        removed = true;
        return normalise(node->partial, std::nullopt, node->children);
    }
    auto idx = path[common];
    if (!node->children[idx])
        return node;
    auto child = erase_at(node->children[idx], path.subspan(common + 1), removed);
    if (!removed)
        return node;
    auto children = node->children;
    children[idx] = std::move(child);
    return normalise(node->partial, node->value, std::move(children));
}

void walk(const NodePtr& node, Nibbles& prefix, const std::function<void(const Bytes&, const Bytes&)>& fn)
{
    if (!node)
        return;
    auto base = prefix.size();
    prefix.insert(prefix.end(), node->partial.begin(), node->partial.end());
    if (node->value && prefix.size() % 2 == 0)
        fn(from_nibbles(prefix), *node->value);
    for (size_t i = 0; i < 16; ++i) {
        if (!node->children[i])
            continue;
        prefix.push_back(static_cast<uint8_t>(i));
        walk(node->children[i], prefix, fn);
        prefix.pop_back();
    }
    prefix.resize(base);
}

size_t max_children_at(const NodePtr& node)
{
    if (!node)
        return 0;
    size_t m = node->child_count();
    for (const auto& c : node->children)
        m = std::max(m, max_children_at(c));
    return m;
}

struct DecodedNode {
    Nibbles partial;
    std::optional<Bytes> value;
    std::array<std::optional<Digest>, 16> children{};
};

std::optional<DecodedNode> decode_node(ByteView enc)
{
    try {
        ByteReader r(enc);
        auto tag = r.u8();
        if (tag < 0x01 || tag > 0x03)
            return std::nullopt;
        DecodedNode d;
        auto count = r.u16();
        auto packed = r.raw((count + 1u) / 2);
        for (size_t i = 0; i < count; ++i) {
            auto b = packed[i / 2];
            d.partial.push_back(i % 2 == 0 ? b >> 4 : b & 0x0f);
        }
        if (count % 2 == 1 && (packed.back() & 0x0f) != 0)
            return std::nullopt;
        uint16_t bitmap = 0;
        if (tag != 0x01) {
            bitmap = r.u16();
            if (bitmap == 0)
                return std::nullopt;
        }
        if (tag != 0x02)
            d.value = r.blob();
        for (size_t i = 0; i < 16; ++i)
            if (bitmap & (1u << i))
                d.children[i] = Digest::from_view(r.raw(32));
        if (!r.done())
            return std::nullopt;
        return d;
    } catch (const Error&) {
        return std::nullopt;
    }
}

} // namespace

StateTrie::StateTrie() = default;

StateTrie StateTrie::insert(ByteView key, ByteView value) const
{
    auto path = to_nibbles(key);
    return StateTrie(insert_at(root_, path, value));
}

StateTrie StateTrie::erase(ByteView key) const
{
    auto path = to_nibbles(key);
    bool removed = false;
    auto res = erase_at(root_, path, removed);
    return removed ? StateTrie(res) : *this;
}

std::optional<Bytes> StateTrie::get(ByteView key) const
{
    auto path = to_nibbles(key);
    std::span<const uint8_t> rest(path);
    const Node* node = root_.get();
    while (node) {
        auto common = common_prefix(node->partial, rest);
        if (common != node->partial.size())
            return std::nullopt;
        rest = rest.subspan(common);
        if (rest.empty())
            return node->value;
        node = node->children[rest.front()].get();
        rest = rest.subspan(1);
    }
    return std::nullopt;
}

Digest empty_root()
{
    static const Digest d = [] {
        static constexpr uint8_t empty[] = {0x00};
        return hash(ByteView(empty));
    }();
    return d;
}

Digest StateTrie::root() const
{
    return root_ ? root_->digest : empty_root();
}

InclusionProof StateTrie::prove(ByteView key) const
{
    auto path = to_nibbles(key);
    std::span<const uint8_t> rest(path);
    InclusionProof proof;
    proof.key.assign(key.begin(), key.end());
    const Node* node = root_.get();
    while (node) {
        proof.path.push_back(node->encode());
        auto common = common_prefix(node->partial, rest);
        if (common != node->partial.size())
            break;
        rest = rest.subspan(common);
        if (rest.empty()) {
            if (!node->value)
                break;
            proof.value = *node->value;
            return proof;
        }
        node = node->children[rest.front()].get();
        rest = rest.subspan(1);
    }
    throw Error(ErrorKind::key_absent, "key not present in trie: " + to_hex(key));
}

size_t StateTrie::size() const noexcept
{
    return root_ ? root_->count : 0;
}

void StateTrie::for_each(const std::function<void(const Bytes&, const Bytes&)>& fn) const
{
    Nibbles prefix;
    walk(root_, prefix, fn);
}

size_t StateTrie::max_children() const
{
    return max_children_at(root_);
}

bool verify_proof(const Digest& root, const InclusionProof& proof)
{
    if (proof.path.empty())
        return false;
    auto path = to_nibbles(proof.key);
    std::span<const uint8_t> rest(path);
    Digest expect = root;
    for (size_t i = 0; i < proof.path.size(); ++i) {
        if (hash(proof.path[i]) != expect)
            return false;
        auto node = decode_node(proof.path[i]);
        if (!node)
            return false;
        auto common = common_prefix(node->partial, rest);
        if (common != node->partial.size())
            return false;
        rest = rest.subspan(common);
        if (rest.empty())
            return i + 1 == proof.path.size() && node->value && *node->value == proof.value;
        auto child = node->children[rest.front()];
        if (!child)
            return false;
        expect = *child;
        rest = rest.subspan(1);
    }
    return false;
}

} // namespace relaylab::trie
