// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <relaylab/babe.hpp>
#include <relaylab/sim.hpp>

#include <unordered_set>

namespace relaylab::sim {

struct XcmpInputs {
    const babe::BlockTree* blocks = nullptr; // every produced block
    std::function<Bytes(const Digest& block, xcmp::ParaId)> head_at; // para head in a block's post-state
    std::unordered_set<Digest> skip;         // blocks carrying invalid candidates
    std::unordered_set<Digest> reference;    // blocks of the reference chain
    xcmp::ParaId max_para = 0;
    size_t max_batches = SIZE_MAX;
};

// Walks every branch of the block tree and checks per-pair ordering,
// whole-batch delivery, watermark progress and agreement of each receiver
// with a replay of its inbox on its own branch. Latency and counts come from
// the reference chain.
void audit_xcmp(const XcmpInputs& in, MetricsReport& report);

} // namespace relaylab::sim
