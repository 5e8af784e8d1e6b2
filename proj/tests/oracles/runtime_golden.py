#!/usr/bin/env python3
# relaylab: deterministic relay-chain protocol laboratory
# Copyright 2026 The relaylab Authors.
# SPDX-License-Identifier: Apache-2.0
"""Independent reference for one relay block applied to a fixed genesis.

Recomputes balances, nonces, fees, the fee multiplier and the record keys from
the documented rules, then hashes the resulting key/value set with the trie
reference. Writes tests/data/runtime_golden.json.
"""
import json
import os
import struct

from trie_golden import root

UNIT = 10**12
REGULAR_TIME_CAP = 2_000_000_000 * 3 // 4
BASE = {"transfer": 1000, "bond": 1500, "remark": 200}
BASE_TIME = {"transfer": 20_000, "bond": 25_000, "remark": 10_000}
ARGS_LEN = {"transfer": 12, "bond": 8}

GENESIS = {1: 1_000_000_000, 2: 500_000_000}
AUTHOR = 3
TIMESTAMP = 6000
TXS = [
    {"signer": 1, "nonce": 0, "call": "transfer", "to": 2, "amount": 1000},
    {"signer": 2, "nonce": 0, "call": "transfer", "to": 3, "amount": 250},
    {"signer": 1, "nonce": 1, "call": "bond", "amount": 5000},
    {"signer": 2, "nonce": 1, "call": "remark", "text": "hello"},
]


def u64(v):
    return struct.pack("<Q", v)


def trunc_div(a, b):
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def main():
    bal = dict(GENESIS)
    bond, nonce, rec = {}, {}, {}
    fees = 0
    regular_time = 0
    for tx in TXS:
        call = tx["call"]
        args_len = ARGS_LEN.get(call, len(tx.get("text", "")))
        length = 1 + 4 + 8 + 4 + args_len + 32
        time = BASE_TIME[call] + 10 * length
        fee = BASE[call] + length + time  # multiplier is exactly one here
        regular_time += time
        s = tx["signer"]
        bal[s] -= fee
        fees += fee
        nonce[s] = tx["nonce"] + 1
        if call == "transfer":
            bal[s] -= tx["amount"]
            bal[tx["to"]] = bal.get(tx["to"], 0) + tx["amount"]
        elif call == "bond":
            bal[s] -= tx["amount"]
            bond[s] = bond.get(s, 0) + tx["amount"]
        else:
            rec[f"rec/{call}/{s}/{tx['nonce']}"] = tx["text"].encode()
    producer = fees // 5
    bal[AUTHOR] = bal.get(AUTHOR, 0) + producer
    treasury = fees - producer
    # m' = m + m * (fullness - 1/4) / 3000, truncated toward zero
    diff = regular_time * 4 - REGULAR_TIME_CAP
    mult = UNIT + trunc_div(UNIT * diff, REGULAR_TIME_CAP * 4 * 3000)

    pairs = {b"code": struct.pack("<I", 0), b"mult": u64(mult), b"time": u64(TIMESTAMP), b"treasury": u64(treasury)}
    for a, v in bal.items():
        pairs[f"bal/{a}".encode()] = u64(v)
    for a, v in bond.items():
        pairs[f"bond/{a}".encode()] = u64(v)
    for a, v in nonce.items():
        pairs[f"nonce/{a}".encode()] = u64(v)
    for k, v in rec.items():
        pairs[k.encode()] = v
    out = {
        "genesis": {str(k): v for k, v in GENESIS.items()},
        "author": AUTHOR,
        "timestamp": TIMESTAMP,
        "transactions": TXS,
        "balances": {str(k): v for k, v in sorted(bal.items())},
        "treasury": treasury,
        "multiplier": mult,
        "post_root": root(pairs).hex(),
    }
    path = os.path.join(os.path.dirname(__file__), "..", "data", "runtime_golden.json")
    with open(path, "w") as f:
        json.dump(out, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
