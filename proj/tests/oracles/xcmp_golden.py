#!/usr/bin/env python3
# relaylab: deterministic relay-chain protocol laboratory
# Copyright 2026 The relaylab Authors.
# SPDX-License-Identifier: Apache-2.0
"""Independent reference for outbox commitments.

Rolls per-destination hash chains and the binary Merkle root over head leaves
by hand and writes tests/data/xcmp_golden.json.
"""
import hashlib
import json
import os
import struct


def h(b):
    return hashlib.blake2b(b, digest_size=32).digest()


def step(head, msg):
    return h(head + h(msg))


def leaf(dest, head):
    return h(b"\x00" + struct.pack("<I", dest) + head)


def merkle_root(leaves):
    if not leaves:
        return bytes(32)
    size = 1
    while size < len(leaves):
        size *= 2
    level = leaves + [leaves[-1]] * (size - len(leaves))
    while len(level) > 1:
        level = [h(b"\x01" + level[i] + level[i + 1]) for i in range(0, len(level), 2)]
    return level[0]


BLOCKS = [
    {2: [b"hello", b"world"], 5: [b"ping"]},
    {5: [b"pong", b"again"], 7: [b"first to seven"]},
]


def main():
    heads = {}
    out = []
    for i, outgoing in enumerate(BLOCKS):
        for dest, msgs in sorted(outgoing.items()):
            head = heads.get(dest, bytes(32))
            for m in msgs:
                head = step(head, m)
            heads[dest] = head
        root = merkle_root([leaf(d, heads[d]) for d in sorted(heads)])
        out.append({
            "block": i,
            "outgoing": {str(d): [m.hex() for m in ms] for d, ms in sorted(outgoing.items())},
            "heads": {str(d): heads[d].hex() for d in sorted(heads)},
            "message_root": root.hex(),
        })
    path = os.path.join(os.path.dirname(__file__), "..", "data", "xcmp_golden.json")
    with open(path, "w") as f:
        json.dump(out, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
