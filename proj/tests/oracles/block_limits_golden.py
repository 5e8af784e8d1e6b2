#!/usr/bin/env python3
# relaylab: deterministic relay-chain protocol laboratory
# Copyright 2026 The relaylab Authors.
# SPDX-License-Identifier: Apache-2.0
"""Independent reference for block resource selection.

Operational extrinsics are considered first, then regular ones, each group in
arrival order. Regular extrinsics may use at most 3/4 of each resource; the
whole block is capped at the full limit. Writes
tests/data/block_limits_golden.json.
"""
import json
import os
import random

LIMIT = {"length": 1000, "time": 2000, "memory": 4000}


def select(queue):
    order = [e for e in queue if e["priority"] == "operational"] + [e for e in queue if e["priority"] == "regular"]
    used = {k: 0 for k in LIMIT}
    reg = {k: 0 for k in LIMIT}
    out = []
    for e in order:
        if any(used[k] + e[k] > LIMIT[k] for k in LIMIT):
            continue
        if e["priority"] == "regular":
            if any(4 * (reg[k] + e[k]) > 3 * LIMIT[k] for k in LIMIT):
                continue
            for k in LIMIT:
                reg[k] += e[k]
        for k in LIMIT:
            used[k] += e[k]
        out.append(e["id"])
    return out


def main():
    rng = random.Random(7)
    queue = []
    for i in range(24):
        queue.append({
            "id": i,
            "priority": "operational" if rng.random() < 0.25 else "regular",
            "length": rng.randint(10, 200),
            "time": rng.randint(10, 400),
            "memory": rng.randint(10, 800),
        })
    doc = {"limits": LIMIT, "queue": queue, "selected": select(queue)}
    path = os.path.join(os.path.dirname(__file__), "..", "data", "block_limits_golden.json")
    with open(path, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
