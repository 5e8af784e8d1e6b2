// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

// Acceptance suites shared by the acceptance binary and `relaylab check`.
namespace relaylab::suites {

struct Outcome {
    bool passed = false;
    std::string detail; // one line of evidence
};

struct Suite {
    int number;
    std::string name;
    std::string claim;
    std::function<Outcome()> run;
};

// SIM_LOG = trace | debug | info | warn | error | off (default warn), logging to stderr.
// Returns false for an unrecognised level.
bool configure_logging();

// Data directories default to the source tree; RELAYLAB_ROOT overrides it.
std::string root();

const std::vector<Suite>& all();
const Suite* find(const std::string& name); // by name or number; nullptr when unknown

// Runs a suite; an exception counts as a failure.
Outcome execute(const Suite& s);

// "PASS  3 grandpa-safety  <detail>"
std::string format(const Suite& s, const Outcome& o);

} // namespace relaylab::suites
