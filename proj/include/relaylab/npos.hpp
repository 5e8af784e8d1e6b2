// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <relaylab/common.hpp>

#include <map>
#include <span>
#include <string>
#include <vector>

namespace relaylab::npos {

using CandidateId = std::string;
using NominatorId = std::string;

struct Nominator {
    NominatorId id;
    uint64_t stake = 0;
    std::vector<CandidateId> approvals;
};

// Candidate self-stake is an extra nominator approving only that candidate.
struct ElectionInstance {
    std::vector<Nominator> nominators;
    std::vector<CandidateId> candidates;
    size_t committee_size = 1;

    void validate() const;
};

using Distribution = std::map<std::pair<NominatorId, CandidateId>, uint64_t>;

struct ElectionResult {
    std::vector<CandidateId> committee; // sorted
    Distribution distribution;          // f(n, v); zero entries omitted

    std::map<CandidateId, uint64_t> supports() const;
    uint64_t min_support() const;
};

// Exact PJR checker enumerates nominator subsets, so it is capped.
struct PjrCap {
    size_t max_nominators = 12;
    size_t max_candidates = 10;
    size_t max_committee = 5;
};

// Sequential Phragmén committee selection followed by star balancing.
ElectionResult elect(const ElectionInstance& instance);

// Committee chosen by sequential Phragmén alone (exact rational loads).
std::vector<CandidateId> phragmen_committee(const ElectionInstance& instance);

bool check_pjr(const ElectionInstance& instance, std::span<const CandidateId> committee, PjrCap cap = {});

// Starts from an even split of each nominator over its elected approvals.
ElectionResult balance_distribution(const ElectionInstance& instance, std::span<const CandidateId> committee);

// Star balancing of an existing distribution. Stops when no single nominator
// can raise the minimum support over its backed validators by more than
// `tolerance` stake units.
ElectionResult rebalance(const ElectionInstance& instance, ElectionResult start, uint64_t tolerance = 1);

} // namespace relaylab::npos
