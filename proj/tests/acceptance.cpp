// relaylab: deterministic relay-chain protocol laboratory
// Copyright 2026 The relaylab Authors.
// SPDX-License-Identifier: Apache-2.0

// Runs the acceptance suites (all, or those named on the command line) and
// prints one PASS/FAIL line each. Exits 1 when any fails.

#include "suites.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>

using namespace relaylab;

int main(int argc, char** argv)
{
    if (!suites::configure_logging()) {
        std::cerr << "unknown SIM_LOG level\n";
        return 2;
    }
    std::vector<const suites::Suite*> chosen;
    for (int i = 1; i < argc; ++i) {
        const auto* s = suites::find(argv[i]);
        if (!s) {
            std::cerr << "unknown suite: " << argv[i] << "\n";
            return 2;
        }
        chosen.push_back(s);
    }
    if (chosen.empty())
        for (const auto& s : suites::all())
            chosen.push_back(&s);

    int failed = 0;
    for (const auto* s : chosen) {
        auto start = std::chrono::steady_clock::now();
        auto outcome = suites::execute(*s);
        std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
        char secs[32];
        std::snprintf(secs, sizeof secs, " [%.1fs]", took.count());
        std::cout << suites::format(*s, outcome) << secs << std::endl;
        failed += !outcome.passed;
    }
    std::cout << (chosen.size() - failed) << "/" << chosen.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
