#!/usr/bin/env python3
# relaylab: deterministic relay-chain protocol laboratory
# Copyright 2026 The relaylab Authors.
# SPDX-License-Identifier: Apache-2.0
"""Validates shipped inputs and live CLI outputs against docs/schemas."""

import argparse
import json
import pathlib
import subprocess
import sys

import jsonschema


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--cli", required=True, help="relaylab binary")
    ap.add_argument("--root", required=True, help="source tree")
    args = ap.parse_args()
    root = pathlib.Path(args.root)

    schemas = {}
    for p in sorted((root / "docs" / "schemas").glob("*.schema.json")):
        s = json.loads(p.read_text())
        jsonschema.Draft202012Validator.check_schema(s)
        schemas[p.name.removesuffix(".schema.json")] = jsonschema.Draft202012Validator(s)

    failures = []
    checked = 0

    def check(kind, doc, where):
        nonlocal checked
        checked += 1
        for err in schemas[kind].iter_errors(doc):
            failures.append(f"{where}: {err.json_path}: {err.message}")

    def cli(*argv):
        out = subprocess.run([args.cli, *argv], capture_output=True, text=True)
        if out.returncode not in (0, 1):
            failures.append(f"relaylab {' '.join(argv)} exited {out.returncode}: {out.stderr.strip()}")
        return out.stdout

    inputs = {
        "scenario": root.glob("scenarios/*.json"),
        "election-instance": root.glob("data/npos-instances/*.json"),
        "referendum": root.glob("data/referenda/*.json"),
        "auction": root.glob("data/auctions/*.json"),
    }
    for kind, paths in inputs.items():
        for p in sorted(paths):
            check(kind, json.loads(p.read_text()), p.relative_to(root))
            if kind == "scenario":
                check("report", json.loads(cli("run", str(p))), f"report of {p.name}")
            elif kind == "election-instance":
                check("election-result", json.loads(cli("elect", str(p))), f"result of {p.name}")
            elif kind == "referendum":
                check("verdict", json.loads(cli("tally", str(p))), f"verdict of {p.name}")
            else:
                check("auction-outcome", json.loads(cli("auction", str(p))), f"outcome of {p.name}")

    trace = cli("trace", str(root / "scenarios" / "parachain-messaging.json")).splitlines()
    kinds = set()
    for i, line in enumerate(trace):
        doc = json.loads(line)
        # first line of each kind plus a regular sample
        if doc.get("kind") not in kinds or i % 50 == 0:
            kinds.add(doc.get("kind"))
            check("trace-line", doc, f"trace line {i + 1}")
    check("check-result", json.loads(cli("check", "governance", "--format", "json")), "check output")

    for f in failures[:50]:
        print(f)
    print(f"{checked} documents against {len(schemas)} schemas, {len(failures)} problems")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
