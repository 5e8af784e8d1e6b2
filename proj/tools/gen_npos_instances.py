#!/usr/bin/env python3
# relaylab: deterministic relay-chain protocol laboratory
# Copyright 2026 The relaylab Authors.
# SPDX-License-Identifier: Apache-2.0
"""Writes the capped election instances shipped under data/npos-instances/."""

import json
import pathlib
import random
import sys


def nominator(i, stake, approvals):
    return {"id": f"n{i:02d}", "stake": stake, "approvals": sorted(approvals)}


def fixed():
    yield "single-candidate", {
        "candidates": ["A"], "committee_size": 1,
        "nominators": [nominator(0, 10, ["A"])]}
    yield "two-way-balance", {
        "candidates": ["A", "B"], "committee_size": 2,
        "nominators": [nominator(0, 100, ["A", "B"]), nominator(1, 40, ["B"])]}
    yield "cohesive-minority", {
        "candidates": ["A", "B", "C"], "committee_size": 2,
        "nominators": [nominator(0, 50, ["A"]), nominator(1, 50, ["A"]), nominator(2, 60, ["B", "C"])]}
    yield "disjoint-parties", {
        "candidates": list("ABCDEF"), "committee_size": 4,
        "nominators": [nominator(i, 100, list("ABC") if i < 6 else list("DEF")) for i in range(12)]}
    yield "whale", {
        "candidates": list("ABCDE"), "committee_size": 3,
        "nominators": [nominator(0, 10_000, ["A"])] + [nominator(i, 10, ["B", "C", "D", "E"]) for i in range(1, 12)]}
    yield "unbacked-seat", {
        "candidates": ["A", "B", "C"], "committee_size": 3,
        "nominators": [nominator(0, 30, ["A"]), nominator(1, 20, ["B"])]}


def randomised(rng, count):
    for k in range(count):
        nc = rng.randint(2, 10)
        cands = [chr(ord("A") + c) for c in range(nc)]
        seats = rng.randint(1, min(5, nc))
        noms = []
        for i in range(rng.randint(1, 12)):
            approvals = [c for c in cands if rng.random() < 0.35] or [rng.choice(cands)]
            noms.append(nominator(i, rng.randint(1, 1_000_000), approvals))
        yield f"random-{k:02d}", {"candidates": cands, "committee_size": seats, "nominators": noms}


def main():
    out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "data/npos-instances")
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20260)
    for name, inst in list(fixed()) + list(randomised(rng, 40)):
        (out / f"{name}.json").write_text(json.dumps(inst, indent=2) + "\n")


if __name__ == "__main__":
    main()
