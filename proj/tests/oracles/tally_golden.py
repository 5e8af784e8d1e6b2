#!/usr/bin/env python3
# relaylab: deterministic relay-chain protocol laboratory
# Copyright 2026 The relaylab Authors.
# SPDX-License-Identifier: Apache-2.0
"""Tally truth table for the three turnout-bias rules.

Uses exact rational square roots via fractions on perfect squares where
possible and squared comparison otherwise. Writes tests/data/tally_golden.json.
"""
import json
import os
from fractions import Fraction


def approves(bias, aye, nay, turnout, electorate):
    if turnout == 0:
        return False
    if bias == "simple":
        return aye > nay
    # compare aye/nay against sqrt ratios without floating point
    if bias == "positive":
        # aye * sqrt(t) > nay * sqrt(e)
        lhs, rhs = Fraction(aye) ** 2 * turnout, Fraction(nay) ** 2 * electorate
    else:
        lhs, rhs = Fraction(aye) ** 2 * electorate, Fraction(nay) ** 2 * turnout
    return lhs > rhs


def main():
    rows = []
    electorate = 1000
    for turnout in (0, 10, 100, 250, 400, 640, 1000):
        for aye_pct in (0, 20, 40, 50, 55, 60, 67, 75, 90, 100):
            aye = turnout * aye_pct // 100
            nay = turnout - aye
            for bias in ("positive", "simple", "negative"):
                rows.append({
                    "bias": bias, "aye": aye, "nay": nay,
                    "turnout": turnout, "electorate": electorate,
                    "approved": approves(bias, aye, nay, turnout, electorate),
                })
    path = os.path.join(os.path.dirname(__file__), "..", "data", "tally_golden.json")
    with open(path, "w") as f:
        json.dump(rows, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
